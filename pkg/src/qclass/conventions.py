"""The sign-convention handbook, as a printable document.

Everything the engine computes depends on a small number of global choices.
They are collected here in one place, in the order they are made, so that any
output can be audited against them; ``qclass explain-conventions`` prints this
text.
"""

HANDBOOK = """\
Sign conventions used by this engine
====================================

1. Scalars and normal form
   A chart is an ordered list of named coordinates with parities.  Scalars
   are polynomials over Q: free in the even coordinates, Grassmann in the odd
   ones.  The normal form of a monomial carries its odd factors in ascending
   chart order; reordering odd factors during any computation contributes the
   sign of the permutation, and a repeated odd factor kills the term.

2. Derivatives are LEFT derivatives
   d_th(m) commutes th to the FRONT of the monomial (collecting one sign per
   odd factor jumped over) and strikes it.  Consequences used throughout:
       d_i(a.b) = (d_i a).b + (-1)^{eps_i |a|} a.(d_i b)
       d_i d_j  = (-1)^{eps_i eps_j} d_j d_i
   Even-coordinate derivatives are the usual formal ones.

3. One word order fixes every tensor sign
   A rank-(n,m) tensor is the formal word
       coefficient . e_{i_1} ... e_{i_n} f^{j_1} ... f^{j_m}
   -- scalar coefficient leftmost, upper (vector) symbols before lower
   (covector) symbols.  Any reordering of two symbols with parities s,t costs
   (-1)^{st}.  Components of a tensor of intrinsic parity p are homogeneous
   of parity p + eps(uppers) + eps(lowers).

4. Pairing and contraction
   Covectors act on vectors from the left: <f^j, e_i> = delta^j_i.
   Contraction of an upper slot with a lower slot commutes the covector
   symbol leftward until it reaches the vector symbol and then pairs; all
   signs follow from rule 3.  With this choice the identity endomorphism has
   Kronecker components and is the two-sided unit of composition.

5. Endomorphisms
   A (1,1) tensor acts on vector fields from the left; its components are
   exactly its images of the coordinate basis fields, (a(e_j))^i = a^i_j.
   Composition:  (a o b)^i_j = sum_k (-1)^{(|b| + eps_j + eps_k)(eps_i + eps_k)}
                               a^i_k . b^k_j.
   Supertrace:   Str(a) = sum_i (-1)^{eps_i} a^i_i  -- the unique sign (up to
   normalization) killing all supercommutators under the composition above,
   equal to the self-contraction of rule 4, with Str(identity) = p - q.

6. Vector-field calculus
   X(f) = sum_i X^i . d_i f  (components multiply from the left).
   [X,Y]^k = X(Y^k) - (-1)^{|X||Y|} Y(X^k).
   The Lie derivative extends X(.) and [X, .] to all tensors by the graded
   Leibniz rule over the word of rule 3 and duality on covectors; the
   coboundary is the Lie derivative along the certified odd field and flips
   intrinsic parity.

7. Connections
   Christoffel symbols are stored in canonical position:
       D_i e_j = sum_k Gamma^k_{ij} . e_k,
   graded-symmetric in (i,j):  Gamma^k_{ij} = (-1)^{eps_i eps_j} Gamma^k_{ji},
   each entry homogeneous of parity eps_i + eps_j + eps_k.  Covariant
   derivatives extend by the same Leibniz engine as rule 6; the (n, m+1)
   result carries the direction in its FIRST lower slot, and plugging a
   vector field into that slot is the directional derivative.
   Curvature: R(X,Y) = [nabla_X, nabla_Y] - nabla_{[X,Y]}.

8. Series and evaluation order
   Multi-argument forms evaluate their lower slots left to right; assembling
   a form from its values on coordinate tuples is the exact inverse of that
   evaluation.  The gradient endomorphism is Lam(X) = nabla_X Q; the closed
   one-form is Omega_X = nabla_X Lam - R(X, Q); series values compose left to
   right, Omega_{X_1} o ... o Omega_{X_n}.

9. Reserved names
   The homotopy construction extends a chart by one even and one odd
   coordinate named '__t' and '__th'.  The '__' prefix is reserved;
   manifests may not declare coordinates with it.

10. Surface syntax
   Rationals only, '*' mandatory, '^' only as described in the expression
   grammar; user-written odd products are multiplied left to right, so
   'th2*th1' denotes -th1*th2 in normal form.
"""
