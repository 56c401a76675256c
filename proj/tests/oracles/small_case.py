"""Independent reference values for the 3-point x 2-point fixture in the unit tests."""
import numpy as np

xs = np.array([0.0, 0.5, 1.0])
ts = np.array([0.0, 1.0])
ws = np.array([0.25, 0.5, 0.25])
wt = np.array([0.5, 0.5])
X = np.array([
    [1.0, 2.0, 0.5, -1.0, 3.0, 0.0],
    [0.0, 1.0, 1.5, 2.0, -1.0, 1.0],
    [2.0, -0.5, 0.0, 1.0, 1.0, 2.5],
])
S, T = 3, 2
Xc = X - X.mean(axis=0)
C = Xc.T @ Xc / X.shape[0]
K = C.reshape(S, T, S, T)

A1 = np.einsum("atbt,t->ab", K, wt)
A2 = np.einsum("sasb,s->ab", K, ws)
tr = np.einsum("stst,s,t->", K, ws, wt)
trace_sep = np.einsum("ab,cd->acbd", A1, A2) / tr

psi = np.ones((T, T))
P1 = np.einsum("atbu,t,u,tu->ab", K, wt, wt, psi)
P2 = np.einsum("uv,uavb,u,v->ab", P1, K, ws, ws)
nrm2 = np.einsum("ab,a,b->", P1 ** 2, ws, ws)
prod_sep = np.einsum("ab,cd->acbd", P1, P2) / nrm2

# SPCA: best rank-one approximation in the weighted L2 sense.
Dw = np.sqrt(np.einsum("a,b->ab", ws, ws)).reshape(-1)
Ew = np.sqrt(np.einsum("a,b->ab", wt, wt)).reshape(-1)
R = K.transpose(0, 2, 1, 3).reshape(S * S, T * T)
Rw = Dw[:, None] * R * Ew[None, :]
U, sv, Vt = np.linalg.svd(Rw)
lam1 = sv[0] ** 2
spca = (sv[0] * np.outer(U[:, 0] / Dw, Vt[0] / Ew)).reshape(S, S, T, T).transpose(0, 2, 1, 3)

def sup_dev(sep):
    d = np.abs(K - sep)
    i = np.unravel_index(np.argmax(d.reshape(S * T, S * T)), (S * T, S * T))
    return d.max(), (i[0] // T, i[0] % T, i[1] // T, i[1] % T)

np.set_printoptions(precision=17)
print("C", repr(C))
print("A1", repr(A1)); print("A2", repr(A2)); print("trace", repr(tr))
print("P1", repr(P1)); print("P2", repr(P2)); print("norm2", repr(nrm2))
print("trace_sep(0,1,2,0)", repr(trace_sep[0, 1, 2, 0]))
print("prod_sep(1,0,2,1)", repr(prod_sep[1, 0, 2, 1]))
print("spca(1,1,0,0)", repr(spca[1, 1, 0, 0]), "lam1", repr(lam1), "lam2", repr(sv[1] ** 2))
print("sup trace", sup_dev(trace_sep)); print("sup prod", sup_dev(prod_sep)); print("sup spca", sup_dev(spca))
print("supC", np.abs(C).max())
