"""Pure-Python Smith normal form over Z/p^K and Z_(p).

Both routines return ``(exps, U, V, Vinv)`` with ``U A V = diag(p^exps)``
(rows beyond ``len(exps)`` of ``U A V`` vanish).  Matrices are lists of
rows.  The modular routine has a compiled twin in ``_kernel.pyx`` with the
same contract.
"""
from fractions import Fraction


def _identity(n):
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        out[i][i] = 1
    return out


def _val(x, p, K):
    if x == 0:
        return K
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def snf_modular(rows, ncols, p, K):
    """Smith form of an integer matrix with entries reduced mod p^K."""
    M = p ** K
    A = [[x % M for x in row] for row in rows]
    m, n = len(A), ncols
    U = _identity(m)
    V = _identity(n)
    Vinv = _identity(n)
    exps = []
    for k in range(min(m, n)):
        best = None
        bv = K
        for i in range(k, m):
            Ai = A[i]
            for j in range(k, n):
                x = Ai[j]
                if x:
                    v = _val(x, p, K)
                    if v < bv:
                        bv, best = v, (i, j)
                        if v == 0:
                            break
            if bv == 0:
                break
        if best is None:
            break
        i, j = best
        if i != k:
            A[i], A[k] = A[k], A[i]
            U[i], U[k] = U[k], U[i]
        if j != k:
            for row in A:
                row[j], row[k] = row[k], row[j]
            for row in V:
                row[j], row[k] = row[k], row[j]
            Vinv[j], Vinv[k] = Vinv[k], Vinv[j]
        pv = p ** bv
        unit = A[k][k] // pv
        uinv = pow(unit, -1, M)
        if uinv != 1:
            A[k] = [x * uinv % M for x in A[k]]
            U[k] = [x * uinv % M for x in U[k]]
        Ak, Uk = A[k], U[k]
        for i in range(k + 1, m):
            x = A[i][k]
            if x:
                c = x // pv
                Ai = A[i]
                for jj in range(k, n):
                    if Ak[jj]:
                        Ai[jj] = (Ai[jj] - c * Ak[jj]) % M
                Ui = U[i]
                for jj in range(m):
                    if Uk[jj]:
                        Ui[jj] = (Ui[jj] - c * Uk[jj]) % M
        for j in range(k + 1, n):
            x = Ak[j]
            if x:
                c = x // pv
                Ak[j] = 0
                for row in V:
                    if row[k]:
                        row[j] = (row[j] - c * row[k]) % M
                Vj, Vk = Vinv[j], Vinv[k]
                for jj in range(n):
                    if Vj[jj]:
                        Vk[jj] = (Vk[jj] + c * Vj[jj]) % M
        exps.append(bv)
    return exps, U, V, Vinv


def _pval(x, p):
    if isinstance(x, Fraction):
        x = x.numerator
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def snf_plocal(rows, ncols, p):
    """Smith form over Z_(p); entries are ints or p-integral Fractions."""
    A = [list(row) for row in rows]
    m, n = len(A), ncols
    U = _identity(m)
    V = _identity(n)
    Vinv = _identity(n)
    exps = []
    for k in range(min(m, n)):
        best = None
        bv = None
        for i in range(k, m):
            Ai = A[i]
            for j in range(k, n):
                x = Ai[j]
                if x:
                    v = _pval(x, p)
                    if bv is None or v < bv:
                        bv, best = v, (i, j)
                        if v == 0:
                            break
            if bv == 0:
                break
        if best is None:
            break
        i, j = best
        if i != k:
            A[i], A[k] = A[k], A[i]
            U[i], U[k] = U[k], U[i]
        if j != k:
            for row in A:
                row[j], row[k] = row[k], row[j]
            for row in V:
                row[j], row[k] = row[k], row[j]
            Vinv[j], Vinv[k] = Vinv[k], Vinv[j]
        pv = p ** bv
        scale = Fraction(pv) / Fraction(A[k][k])
        if scale != 1:
            A[k] = [_norm(x * scale) for x in A[k]]
            U[k] = [_norm(x * scale) for x in U[k]]
        A[k][k] = pv
        Ak, Uk = A[k], U[k]
        for i in range(k + 1, m):
            x = A[i][k]
            if x:
                c = _norm(Fraction(x) / pv)
                Ai = A[i]
                for jj in range(k, n):
                    if Ak[jj]:
                        Ai[jj] = _norm(Ai[jj] - c * Ak[jj])
                Ui = U[i]
                for jj in range(m):
                    if Uk[jj]:
                        Ui[jj] = _norm(Ui[jj] - c * Uk[jj])
        for j in range(k + 1, n):
            x = Ak[j]
            if x:
                c = _norm(Fraction(x) / pv)
                Ak[j] = 0
                for row in V:
                    if row[k]:
                        row[j] = _norm(row[j] - c * row[k])
                Vj, Vk = Vinv[j], Vinv[k]
                for jj in range(n):
                    if Vj[jj]:
                        Vk[jj] = _norm(Vk[jj] + c * Vj[jj])
        exps.append(bv)
    return exps, U, V, Vinv
