"""Symbolic derivation of the planar Kepler generators used by the catalog.

Bracket convention: {f, g} = sum_i (df/dp_i dg/dq_i - df/dq_i dg/dp_i),
so {p_i, q_j} = delta_ij.  Run with `python3 docs/derive_kepler.py`.
"""
import sympy as sp

q1, q2, p1, p2 = sp.symbols("q1 q2 p1 p2", real=True)
Q, P = (q1, q2), (p1, p2)


def br(f, g):
    return sp.simplify(sum(sp.diff(f, P[i]) * sp.diff(g, Q[i])
                           - sp.diff(f, Q[i]) * sp.diff(g, P[i]) for i in range(2)))


r = sp.sqrt(q1**2 + q2**2)
H = (p1**2 + p2**2) / 2 - 1 / r
L = q1 * p2 - q2 * p1            # textbook angular momentum
M = -L                           # catalog generator M12 = q2*p1 - q1*p2
A1 = p2 * L - q1 / r             # Runge-Lenz components (textbook sign)
A2 = -p1 * L - q2 / r

print("{H,M} =", br(H, M), " {H,A1} =", br(H, A1), " {H,A2} =", br(H, A2))
print("{M,A1} - A2 =", sp.simplify(br(M, A1) - A2))
print("{A2,M} - A1 =", sp.simplify(br(A2, M) - A1))
print("{A1,A2} + 2*H*M =", sp.simplify(br(A1, A2) + 2 * H * M))
print("A1^2+A2^2 - (1 + 2 H L^2) =", sp.simplify(A1**2 + A2**2 - 1 - 2 * H * L**2))

# Normalised components K = A / sqrt(-+2H); H Poisson-commutes with M and A,
# so {K1, K2} = {A1, A2} / (-+2H).
for sgn, name in ((-1, "U_- (H<0)"), (1, "U_+ (H>0)")):
    s = sp.sqrt(sgn * 2 * H)
    K1, K2 = A1 / s, A2 / s
    print(name)
    print("  {K1,K2} - M*(-2H)/(sgn 2H) =", sp.simplify(br(K1, K2) - (-2 * H * M) / (sgn * 2 * H)))
    print("  {K1,K2} =", sp.simplify(br(A1, A2) / (sgn * 2 * H)), "(in units of M:",
          sp.simplify(br(A1, A2) / (sgn * 2 * H) / M), ")")
    print("  {M,K1} - K2 =", sp.simplify(br(M, K1) - K2))
    print("  {K2,M} - K1 =", sp.simplify(br(K2, M) - K1))
