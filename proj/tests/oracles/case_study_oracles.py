"""Independent high-precision reference values for the Gaussian-variance /
Beta-prior case study and the Whittaker function.

Everything here is computed with mpmath directly from the joint density
p(t, theta) (no Whittaker closed forms, except where mpmath.whitw is the
reference itself). The printed numbers are frozen into the C++ tests.

    python3 tests/oracles/case_study_oracles.py
"""
import mpmath as mp

mp.mp.dps = 25


def log_joint_t(a, N, t, th):
    # density of (t, theta) with t = x'x/2: Gamma(N/2, scale theta) x Beta(a, a)
    return ((N / mp.mpf(2) - 1) * mp.log(t) - t / th - (N / mp.mpf(2)) * mp.log(th)
            - mp.loggamma(N / mp.mpf(2))
            + (a - 1) * mp.log(th) + (a - 1) * mp.log(1 - th) - mp.log(mp.beta(a, a)))


def post_integral(a, N, t, f):
    g = lambda th: f(th) * mp.exp(log_joint_t(a, N, t, th))
    return mp.quad(g, [0, mp.mpf('0.05'), mp.mpf('0.2'), mp.mpf('0.5'), mp.mpf('0.8'), 1])


def post_moment(a, N, t, f):
    return post_integral(a, N, t, f) / post_integral(a, N, t, lambda th: 1)


def fisher_x(a, N, t):
    return post_moment(a, N, t, lambda th: ((a - 1 - N / mp.mpf(2)) / th + t / th**2 - (a - 1) / (1 - th))**2)


def t_averaged(a, N):
    # double-precision nested quadrature over (t, theta); independent of mpmath
    from scipy import integrate
    import math
    lb = math.lgamma(a) * 2 - math.lgamma(2 * a) + math.lgamma(N / 2)

    def joint(t, th):
        return math.exp((N / 2 - 1) * math.log(t) - t / th - (N / 2) * math.log(th) - lb
                        + (a - 1) * math.log(th) + (a - 1) * math.log(1 - th))

    def inner(t, f):
        return integrate.quad(lambda th: f(th) * joint(t, th), 0, 1, epsabs=0, epsrel=1e-12,
                              limit=200, points=[0.05, 0.2, 0.5, 0.8])[0]

    def score(t, th):
        return (a - 1 - N / 2) / th + t / th**2 - (a - 1) / (1 - th)

    def tb_integrand(t):
        p = inner(t, lambda th: 1.0)
        if p == 0.0:
            return 0.0
        fx = inner(t, lambda th: score(t, th)**2) / p
        return p / fx

    def mm_integrand(t):
        p = inner(t, lambda th: 1.0)
        if p == 0.0:
            return 0.0
        m1 = inner(t, lambda th: th)
        m2 = inner(t, lambda th: th * th)
        return m2 - m1 * m1 / p

    brk = [N / 200, N / 20, N / 8, N / 4, N / 2, N, 4 * N]
    edges = [0.0] + brk
    tb = sum(integrate.quad(tb_integrand, lo, hi, epsabs=0, epsrel=1e-11, limit=200)[0]
             for lo, hi in zip(edges[:-1], edges[1:]))
    tb += integrate.quad(tb_integrand, edges[-1], math.inf, epsabs=0, epsrel=1e-11, limit=200)[0]
    mm = sum(integrate.quad(mm_integrand, lo, hi, epsabs=0, epsrel=1e-11, limit=200)[0]
             for lo, hi in zip(edges[:-1], edges[1:]))
    mm += integrate.quad(mm_integrand, edges[-1], math.inf, epsabs=0, epsrel=1e-11, limit=200)[0]
    return tb, mm


def main():
    import sys
    print("# Whittaker W reference values (mpmath.whitw)", flush=True)
    for (k, m, z) in [(1, 0.5, 2), (-0.5, 0.5, 1), (-2, -0.5, 2), (-2, 0.5, 2),
                      (0.25, 1.25, 0.3), (-1.5, 0.75, 7.0)]:
        print(f"W({k},{m},{z}) log = {mp.nstr(mp.log(mp.whitw(k, m, z)), 20)}", flush=True)

    print("# case-study indices xi=(N-6a+2)/4, m=(2a-N)/4", flush=True)
    for (a, N, t) in [(3, 64, 1), (3, 64, 20), (4, 16, 0.1), (2.5, 2, 5), (4, 64, 0.1),
                      (2.5, 64, 20)]:
        xi = mp.mpf(N - 6 * a + 2) / 4
        m = mp.mpf(2 * a - N) / 4
        print(f"a={a} N={N} t={t} logW = {mp.nstr(mp.log(mp.whitw(xi, m, t)), 20)}", flush=True)

    a, N, t = 3, 8, 2
    print("# posterior moments a=3 N=8 t=2")
    mass = post_integral(a, N, t, lambda th: 1)
    print("marginal_t_density", mp.nstr(mass, 20), flush=True)
    for name, f in [("theta", lambda th: th), ("theta2", lambda th: th**2),
                    ("theta_m2", lambda th: th**-2), ("theta_m3", lambda th: th**-3),
                    ("one_minus_theta_m2", lambda th: (1 - th)**-2)]:
        print(name, mp.nstr(post_moment(a, N, t, f), 20), flush=True)
    print("F_x", mp.nstr(fisher_x(a, N, t), 20), flush=True)

    print("# t-averaged quantities (scipy nested quad)")
    for (a, N) in [(3, 2), (3, 8), (2.5, 8), (5, 32)]:
        tb, mm = t_averaged(a, N)
        print(f"a={a} N={N} TBCRB {tb:.15g} MMSE {mm:.15g}", flush=True)

    if len(sys.argv) > 1 and sys.argv[1] == "--large":
        # slow: hypergeometric U at large parameters
        print(f"W(124,-126.5,100) log = {mp.nstr(mp.log(mp.whitw(124, -126.5, 100)), 20)}", flush=True)


if __name__ == "__main__":
    main()
