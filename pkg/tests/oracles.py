"""Reference values computed without the package: closed trigonometric forms
of J_{3/2}, J_{5/2}, J_{+-1/2} and plain bisection."""
import math


def bisect(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = f(m)
        if m in (a, b):
            break
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def j32_zero():
    # x^{3/2} sqrt(pi/2) J_{3/2}(x) = sin x - x cos x; first root in (pi, 3pi/2)
    return bisect(lambda x: math.sin(x) - x * math.cos(x), math.pi + 1e-9, 1.5 * math.pi - 1e-9)


def j52_zero():
    # x^{5/2} sqrt(pi/2) J_{5/2}(x) = (3 - x^2) sin x - 3 x cos x; first root in (5, 6)
    return bisect(lambda x: (3 - x * x) * math.sin(x) - 3 * x * math.cos(x), 5.0, 6.0)


def annulus_l0_root(sigma):
    # J_{1/2}(a)J_{-1/2}(b) - J_{-1/2}(a)J_{1/2}(b) = (2/(pi sqrt(ab))) sin(a - b)
    return math.pi / (1 - sigma)


# frozen values, checked against the functions above by the test-suite
J32_ZERO = 4.493409457909064
J52_ZERO = 5.763459196894550
BALL_TOROIDAL_L1 = 20.190728556426629
BALL_POLOIDAL_L1 = 33.217461914268745
