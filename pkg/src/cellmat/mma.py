"""Method of moving asymptotes, in the standard primal-dual form.

The subproblem replaces objective and constraints by separable rational
approximations whose asymptotes adapt to the iteration history: they
widen while a variable keeps moving in one direction and contract when
it oscillates.  The subproblem is solved by an interior-point Newton
iteration on the full set of primal and dual variables; with far fewer
constraints than variables the Newton step reduces to an (m+1)-square
dense system.

Constraint convention: fval <= 0 is feasible.  All vectors are numpy
arrays; the caller owns the box bounds.
"""

import warnings

import numpy as np

ASYINIT = 0.5
ASYINCR = 1.2
ASYDECR = 0.7
ALBEFA = 0.1
RAA0 = 1e-5
EPSIMIN = 1e-9


class MMA:
    """Holds the asymptote state between update() calls."""

    def __init__(self, n, m, xmin, xmax, move=0.1,
                 a0=1.0, a=None, c=None, d=None):
        self.n = n
        self.m = m
        self.xmin = np.broadcast_to(np.asarray(xmin, float), (n,)).copy()
        self.xmax = np.broadcast_to(np.asarray(xmax, float), (n,)).copy()
        self.move = move
        self.a0 = a0
        self.a = np.zeros(m) if a is None else np.asarray(a, float)
        self.c = np.full(m, 1000.0) if c is None else np.asarray(c, float)
        self.d = np.zeros(m) if d is None else np.asarray(d, float)
        self.iter = 0
        self.low = None
        self.upp = None
        self.xold1 = None
        self.xold2 = None
        self.lam = np.zeros(m)

    def update(self, xval, df0dx, fval, dfdx):
        """One design step; returns the new variables.

        xval (n,), df0dx (n,), fval (m,), dfdx (m, n).
        """
        xval = np.asarray(xval, float)
        df0dx = np.asarray(df0dx, float)
        fval = np.atleast_1d(np.asarray(fval, float))
        dfdx = np.atleast_2d(np.asarray(dfdx, float))
        self.iter += 1
        xrange = self.xmax - self.xmin

        if self.iter < 3:
            self.low = xval - ASYINIT * xrange
            self.upp = xval + ASYINIT * xrange
        else:
            swing = (xval - self.xold1) * (self.xold1 - self.xold2)
            factor = np.ones(self.n)
            factor[swing > 0.0] = ASYINCR
            factor[swing < 0.0] = ASYDECR
            self.low = xval - factor * (self.xold1 - self.low)
            self.upp = xval + factor * (self.upp - self.xold1)
            # proximity clamp 1e-4, not the usual 0.01: the subproblem step
            # is always a fixed fraction of the asymptote gap, so a design
            # stuck oscillating settles to gap-size amplitude, which must
            # end up below the design-change termination threshold
            self.low = np.clip(self.low, xval - 10.0 * xrange,
                               xval - 1e-4 * xrange)
            self.upp = np.clip(self.upp, xval + 1e-4 * xrange,
                               xval + 10.0 * xrange)

        alfa = np.maximum.reduce([self.low + ALBEFA * (xval - self.low),
                                  xval - self.move * xrange, self.xmin])
        beta = np.minimum.reduce([self.upp - ALBEFA * (self.upp - xval),
                                  xval + self.move * xrange, self.xmax])

        xmami = np.maximum(xrange, 1e-5)
        ux1 = self.upp - xval
        xl1 = xval - self.low
        p0 = np.maximum(df0dx, 0.0)
        q0 = np.maximum(-df0dx, 0.0)
        pq0 = 0.001 * (p0 + q0) + RAA0 / xmami
        p0 = (p0 + pq0) * ux1 ** 2
        q0 = (q0 + pq0) * xl1 ** 2
        pp = np.maximum(dfdx, 0.0)
        qq = np.maximum(-dfdx, 0.0)
        ppqq = 0.001 * (pp + qq) + RAA0 / xmami
        pp = (pp + ppqq) * ux1 ** 2
        qq = (qq + ppqq) * xl1 ** 2
        b = pp @ (1.0 / ux1) + qq @ (1.0 / xl1) - fval

        xnew, lam = _subsolv(self, alfa, beta, p0, q0, pp, qq, b)
        if not (np.all(np.isfinite(xnew)) and np.all(np.isfinite(lam))):
            warnings.warn("subproblem solve failed; keeping the iterate",
                          RuntimeWarning, stacklevel=2)
            xnew, lam = xval.copy(), np.zeros(self.m)

        self.xold2 = self.xold1
        self.xold1 = xval.copy()
        self.lam = lam
        return xnew


def _subsolv(mma, alfa, beta, p0, q0, pp, qq, b):
    """Interior-point solve of the separable subproblem.

    min  sum p0/(upp-x) + q0/(x-low) + a0 z + sum(c y + d y^2 / 2)
    s.t. sum pp_i/(upp-x) + qq_i/(x-low) - a_i z - y_i <= b_i,
         alfa <= x <= beta, y >= 0, z >= 0.
    """
    m, n = mma.m, mma.n
    low, upp = mma.low, mma.upp
    a0, a, c, d = mma.a0, mma.a, mma.c, mma.d

    epsi = 1.0
    x = 0.5 * (alfa + beta)
    y = np.ones(m)
    z = 1.0
    lam = np.ones(m)
    xsi = np.maximum(1.0 / (x - alfa), 1.0)
    eta = np.maximum(1.0 / (beta - x), 1.0)
    mu = np.maximum(0.5 * c, 1.0)
    zet = 1.0
    s = np.ones(m)

    def residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi):
        ux1 = upp - x
        xl1 = x - low
        plam = p0 + lam @ pp
        qlam = q0 + lam @ qq
        gvec = pp @ (1.0 / ux1) + qq @ (1.0 / xl1)
        res = np.concatenate([
            plam / ux1 ** 2 - qlam / xl1 ** 2 - xsi + eta,
            c + d * y - mu - lam,
            [a0 - zet - a @ lam],
            gvec - a * z - y + s - b,
            xsi * (x - alfa) - epsi,
            eta * (beta - x) - epsi,
            mu * y - epsi,
            [zet * z - epsi],
            lam * s - epsi,
        ])
        return res, np.linalg.norm(res), np.abs(res).max()

    while epsi > EPSIMIN:
        _, resnorm, resmax = residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi)
        for _ in range(200):
            if resmax <= 0.9 * epsi:
                break
            ux1 = upp - x
            xl1 = x - low
            plam = p0 + lam @ pp
            qlam = q0 + lam @ qq
            gvec = pp @ (1.0 / ux1) + qq @ (1.0 / xl1)
            gg = pp / ux1 ** 2 - qq / xl1 ** 2

            delx = plam / ux1 ** 2 - qlam / xl1 ** 2 \
                - epsi / (x - alfa) + epsi / (beta - x)
            dely = c + d * y - lam - epsi / y
            delz = a0 - a @ lam - epsi / z
            dellam = gvec - a * z - y - b + epsi / lam

            diagx = 2.0 * (plam / ux1 ** 3 + qlam / xl1 ** 3) \
                + xsi / (x - alfa) + eta / (beta - x)
            diagy = d + mu / y
            diaglamyi = s / lam + 1.0 / diagy

            # m << n: eliminate x and y, solve the (m+1) system
            blam = dellam + dely / diagy - gg @ (delx / diagx)
            alam = np.diag(diaglamyi) + (gg / diagx) @ gg.T
            aa = np.block([[alam, a[:, None]],
                           [a[None, :], -zet / z]])
            sol = np.linalg.solve(aa, np.concatenate([blam, [delz]]))
            dlam = sol[:m]
            dz = sol[m]
            dx = -(delx + dlam @ gg) / diagx
            dy = (dlam - dely) / diagy
            dxsi = -xsi + (epsi - xsi * dx) / (x - alfa)
            deta = -eta + (epsi + eta * dx) / (beta - x)
            dmu = -mu + (epsi - mu * dy) / y
            dzet = -zet + (epsi - zet * dz) / z
            ds = -s + (epsi - s * dlam) / lam

            xx = np.concatenate([y, [z], lam, xsi, eta, mu, [zet], s])
            dxx = np.concatenate([dy, [dz], dlam, dxsi, deta, dmu, [dzet], ds])
            step = max(np.max(-1.01 * dxx / xx),
                       np.max(-1.01 * dx / (x - alfa)),
                       np.max(1.01 * dx / (beta - x)), 1.0)
            steg = 1.0 / step

            xo, yo, zo = x, y, z
            lamo, xsio, etao = lam, xsi, eta
            muo, zeto, so = mu, zet, s
            resnew = 2.0 * resnorm
            for _ in range(50):
                if resnew <= resnorm:
                    break
                x = xo + steg * dx
                y = yo + steg * dy
                z = zo + steg * dz
                lam = lamo + steg * dlam
                xsi = xsio + steg * dxsi
                eta = etao + steg * deta
                mu = muo + steg * dmu
                zet = zeto + steg * dzet
                s = so + steg * ds
                _, resnew, resmax = residual(x, y, z, lam, xsi, eta,
                                             mu, zet, s, epsi)
                steg *= 0.5
            resnorm = resnew
        epsi *= 0.1

    return x, lam
