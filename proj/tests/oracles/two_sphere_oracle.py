"""High-precision oracle for the frozen values in the C++ tests.

Solves the two-by-two no-slip boundary system for each mode directly (no
closed-form coefficients), then evaluates drag, the stream function and the
trailing axis velocity with mpmath at 60 digits.

    python3 tests/oracles/two_sphere_oracle.py
"""

import mpmath as mp

mp.mp.dps = 60


def frame(h):
    h = mp.mpf(h)
    alpha = mp.acosh(1 + h)
    return h, alpha, mp.sinh(alpha)


def coefficients(h, n_modes, w=1):
    """b_n, d_n from U_n(alpha) and U_n'(alpha) of the translating sphere."""
    _, a, c = frame(h)
    out = []
    for n in range(1, n_modes + 1):
        p, q = mp.mpf(n) - mp.mpf(1) / 2, mp.mpf(n) + mp.mpf(3) / 2
        k = w * c**2 * n * (n + 1) / mp.sqrt(2)
        rhs0 = k * (mp.exp(-p * a) / (2 * p) - mp.exp(-q * a) / (2 * q))
        rhs1 = k * (-mp.exp(-p * a) + mp.exp(-q * a)) / 2
        m = mp.matrix([[mp.sinh(p * a), mp.sinh(q * a)], [p * mp.cosh(p * a), q * mp.cosh(q * a)]])
        b, d = mp.lu_solve(m, mp.matrix([rhs0, rhs1]))
        out.append((b, d))
    return out


def drag(h, n_modes):
    _, _, c = frame(h)
    return 2 * mp.sqrt(2) * mp.pi / c * sum(b + d for b, d in coefficients(h, n_modes))


def drag_closed_form(h, n_modes):
    """Classical sum for two equal spheres approaching each other."""
    _, a, _ = frame(h)
    s = 0
    for n in range(1, n_modes + 1):
        num = 4 * mp.cosh((n + mp.mpf(1) / 2) * a) ** 2 + (2 * n + 1) ** 2 * mp.sinh(a) ** 2
        den = 2 * mp.sinh((2 * n + 1) * a) - (2 * n + 1) * mp.sinh(2 * a)
        s += mp.mpf(n * (n + 1)) / ((2 * n - 1) * (2 * n + 3)) * (num / den - 1)
    return 6 * mp.pi * mp.mpf(4) / 3 * mp.sinh(a) * s


def psi(h, coeffs, rho, z):
    _, a, c = frame(h)
    w = (rho + 1j * (z + c)) / (rho + 1j * (z - c))
    lw = mp.log(w)
    zeta, eta = mp.re(lw), mp.im(lw)
    x = mp.cos(eta)
    total = 0
    for n, (b, d) in enumerate(coeffs, start=1):
        u = b * mp.sinh((n - mp.mpf(1) / 2) * zeta) + d * mp.sinh((n + mp.mpf(3) / 2) * zeta)
        gegen = (mp.legendre(n - 1, x) - mp.legendre(n + 1, x)) / (2 * n + 1)
        total += u * gegen
    return total / (mp.cosh(zeta) - x) ** mp.mpf(1.5)


def trailing_velocity(h, z0, n_modes):
    """lim 2 psi / rho^2 on the axis at height z0 (mirror of the lower sphere)."""
    coeffs = coefficients(h, n_modes)
    # the angular kernel cancels to O(rho^2); 1e-15 keeps ~30 of the 60 digits
    rho = mp.mpf(10) ** -15
    return 2 * psi(h, coeffs, rho, mp.mpf(z0)) / rho**2


if __name__ == "__main__":
    for n, (b, d) in enumerate(coefficients(0.5, 5), start=1):
        print(f"h=0.5 n={n} b={mp.nstr(b, 17)} d={mp.nstr(d, 17)}")
    for h, modes in [(0.5, 80), (0.1, 200), (2.0, 60), (0.01, 1200)]:
        print(f"kappa_pass h={h}: series {mp.nstr(drag(h, modes), 17)}  closed form {mp.nstr(drag_closed_form(h, modes), 17)}")
    for h, lam, modes in [(0.5, 1.0, 80), (0.1, 0.5, 200), (0.5, 0.1, 80)]:
        print(f"kappa_prop h={h} lambda={lam}: {mp.nstr(trailing_velocity(h, 2 + h + lam, modes), 17)}")
