"""Arbitrary-precision evaluation of the observability-certificate constant chain.

Prints the golden values frozen into tests/certify_test.cpp and the acceptance
suite. Run: python3 tests/oracles/certificate_oracle.py [c1 a c2 b M delta0]
"""
import sys
import mpmath as mp

mp.mp.dps = 60


def chain(c1, a, c2, b, M, delta0):
    c1, a, c2, b, M, delta0 = map(mp.mpf, (c1, a, c2, b, M, delta0))
    gamma = mp.power(2, a / b + a)
    N = max(mp.mpf(2), mp.power(2, b + 2) * delta0 / c2)
    CM = M**2 + (gamma - 1) / (8 * M**2) * mp.power(4 * M**4 / gamma, gamma / (gamma - 1))
    D = mp.exp(-2 * c1 * mp.power(2 * N, a / b)) / (8 * M**2 * N)
    A = mp.power(2, b + 1) / c2 * mp.log(1 + 25 * CM / D)
    tau0 = 3 * A / (2 * N)
    alpha0 = D * mp.exp(-c2 * mp.power(2, -(b + 1)) * A) / 50
    B = mp.exp(-c2 * mp.power(2, -b) * A) / 2
    beta = (8 * N * M**2 * alpha0 * tau0 / A) * mp.exp(
        2 * c1 * mp.power(2 * N, a / b) + 2 * A * delta0 / N)
    T = A / N
    tau = A / (2 * N)
    k = mp.floor(mp.power(A / tau, 1 / b))
    g = tau / (4 * M**2) * mp.exp(-2 * c1 * mp.power(k, a))
    C = mp.sqrt(mp.exp(2 * A * delta0 / N) / g)
    alpha = mp.sqrt(beta)
    return dict(gamma=gamma, N=N, CMgamma=CM, DMN=D, A=A, tau0=tau0,
                alpha0=alpha0, B=B, beta=beta, T=T, alpha=alpha, C=C)


if __name__ == "__main__":
    args = [float(x) for x in sys.argv[1:]] or [1, 1, 1, 1, 1, 0]
    for name, v in chain(*args).items():
        print(f"{name:8s} value={mp.nstr(v, 20):>28s}  log={mp.nstr(mp.log(v), 20)}")
