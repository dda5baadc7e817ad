"""Regenerates the frozen values in goldens.rs (mpmath, 30 digits)."""
from mpmath import mp, quad, exp, mpf, sqrt

mp.dps = 30
bump = lambda x: exp(-1 / (1 - x * x))
d1 = lambda x: abs(bump(x) * (-2 * x / (1 - x * x) ** 2))
d2 = lambda x: abs(bump(x) * ((2 * x / (1 - x * x) ** 2) ** 2 - (2 + 6 * x * x) / (1 - x * x) ** 3))


def sup(g, n=4000):
    xs = [mpf(i) / n for i in range(n)]
    i = max(range(n), key=lambda k: g(xs[k]))
    a, b = xs[max(i - 1, 0)], xs[i + 1]
    r = (sqrt(5) - 1) / 2
    for _ in range(150):
        c, d = b - r * (b - a), a + r * (b - a)
        if g(c) > g(d):
            b = d
        else:
            a = c
    return g((a + b) / 2)


print("POWER_HALF", 4 * quad(lambda t: bump(t * t), [0, 0.5, 0.9, 1]))
print("POWER_THREE_QUARTERS", 2 * quad(lambda x: x ** -0.75 * bump(x), [0, 0.5, 1]))
print("CUSP_06", 2 * quad(lambda x: x ** 0.6 * bump(x), [0, 1]))
print("SUP_D0", bump(mpf(0)))
print("SUP_D1", sup(d1))
print("SUP_D2", sup(d2))
