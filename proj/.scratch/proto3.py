"""High-precision x-kind residual curve + (s,t) convention discrimination."""
import numpy as np
from scipy import special as sp

n = 5
p = (n + 2) / (n - 2)
c0 = (n * (n - 2)) ** ((n - 2) / 4)
cp1 = c0 ** (2 * n / (n - 2))
cbar = (n - 2) / 2 ** (n - 1)
sig = 2 * np.pi ** (n / 2) / sp.gamma(n / 2)
sig2 = 2 * np.pi ** ((n - 1) / 2) / sp.gamma((n - 1) / 2)
S_n = cp1 * 0.5 * np.pi ** (n / 2) * sp.gamma(n / 2) / sp.gamma(n)
c2 = 0.5 * cp1 * sig * 0.5 * sp.beta(n / 2, 1.0)
c3 = (n - 2) * cp1 * (sig2 / (n - 1)) * 0.5 * sp.gamma((n + 1) / 2) * sp.gamma((n - 1) / 2) / sp.gamma(n + 1)
J1 = sp.beta(n / 2 + 1, n / 2) * (sp.digamma(n + 1) - sp.digamma(n / 2))
J2 = sp.beta(n / 2, n / 2 + 1) * (sp.digamma(n + 1) - sp.digamma(n / 2 + 1))
c4 = cp1 * (n - 2) ** 2 / 8 * sig * 0.5 * (J1 - J2)
c5 = cp1 * (n - 2) / n * sig * 0.5 * sp.beta((n + 2) / 2, n / 2)

K_z, dK = 1.0, 1.0
H = np.diag([2.0, 1.0, 1.0, 1.0])
xbar = (cbar / 2.0) ** (1 / n)
xibar = np.zeros((2, n - 1)); xibar[0, 0] = xbar; xibar[1, 0] = -xbar
c_l = c4 * K_z / (c3 * dK)
gamma = (c2 * K_z / c5 * c_l ** (n - 2)) ** (1 / n)

def K_model(xp):
    return K_z + 0.5 * np.einsum("...i,ij,...j->...", xp, H, xp)

def assemble(eps):
    lam = 1.0 / (c_l * eps)
    xs = gamma * eps ** ((n - 2) / n) * xibar
    return lam, xs, K_model(xs) ** (-(n - 2) / 4)

def x_pairing(eps, npairs_total, s_conv, t_conv, seed):
    rng = np.random.default_rng(seed)
    lam, xs, al = assemble(eps)
    i = 0
    B = 1 << 19
    nb = max(1, int(npairs_total // (2 * B)))
    mean_acc = np.zeros(n - 1); var_acc = np.zeros(n - 1)
    for j in range(2):
        s_sum = np.zeros(n - 1); s_sq = np.zeros(n - 1); cnt = 0
        for b in range(nb):
            g = rng.standard_normal((B, n + 1))
            w1 = g[:, 0] / np.linalg.norm(g, axis=1)
            tt = (1.0 - w1) / 2.0
            r = np.sqrt(tt / (1.0 - tt))
            d = rng.standard_normal((B, n))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            yn = np.abs(d[:, n - 1]) * r / lam
            yp = d[:, : n - 1] * r[:, None] / lam
            fsum = np.zeros((B, n - 1))
            for sgn in (1.0, -1.0):
                xp = xs[j] + sgn * yp
                r2_0 = np.sum((xp - xs[0]) ** 2, axis=1) + yn * yn
                r2_1 = np.sum((xp - xs[1]) ** 2, axis=1) + yn * yn
                d0 = c0 * lam ** 1.5 / (1 + lam * lam * r2_0) ** 1.5
                d1 = c0 * lam ** 1.5 / (1 + lam * lam * r2_1) ** 1.5
                q = 0.5 * (d0 ** (p + 1) + d1 ** (p + 1)) / S_n
                u = al[0] * d0 + al[1] * d1
                Kt = K_z + s_conv * dK * yn + 0.5 * t_conv * np.einsum("bi,ij,bj->b", xp, H, xp)
                core = al[0] * d0 ** p + al[1] * d1 ** p - Kt * u ** (p - eps)
                w = 1 + lam * lam * r2_0
                hx = (n - 2) * lam * (xp - xs[i]) * (d0 / w)[:, None]
                fsum += hx * (core / q)[:, None]
            v = 0.5 * fsum
            s_sum += v.sum(axis=0); s_sq += (v * v).sum(axis=0); cnt += B
        m = s_sum / cnt
        var = (s_sq / cnt - m * m) / cnt
        mean_acc += 0.5 * m; var_acc += 0.25 * var
    return lam, xs, al, mean_acc, np.sqrt(var_acc)

def analytic_x(eps):
    lam, xs, al = assemble(eps)
    d2 = np.sum((xs[0] - xs[1]) ** 2)
    e = (2.0 + lam * lam * d2) ** ((2 - n) / 2)
    deps = (n - 2) * e ** (n / (n - 2)) * lam * lam * (xs[1] - xs[0])
    return -al[1] * (c2 / lam) * deps - al[0] ** p * c5 * (H @ xs[0]) / lam

eps_list = [1e-2, 3e-3, 1e-3, 3e-4]
print("== x-kind, high precision, s=-2 t=2 ==")
rows = []
for k, eps in enumerate(eps_list):
    npairs = 2e7 if eps > 5e-4 else 6e7
    lam, xs, al, num, se = x_pairing(eps, npairs, -2.0, 2.0, 1000 + k)
    ax = analytic_x(eps)
    norm = lam / eps ** ((n - 2) / n)
    rn = np.linalg.norm(num - ax) * norm
    sn = np.linalg.norm(se) * norm
    rows.append((eps, rn, sn))
    print(f"eps={eps:8.1e} res_norm={rn:9.4f} se_norm={sn:7.4f}  res/ln2={rn/np.log(eps)**2:.4f}")

le = np.log(np.array([r[0] for r in rows]))
r = np.array([r[1] for r in rows])
print(f"fit x (/ln^2): {np.polyfit(le, np.log(r / le**2), 1)[0]:.3f}")
print(f"fit x (raw)  : {np.polyfit(le, np.log(r), 1)[0]:.3f}")

print("== wrong conventions, moderate N ==")
for (sv, tv) in [(-1.0, 2.0), (-2.0, 1.0)]:
    rl = []
    for k, eps in enumerate(eps_list):
        lam, xs, al, num, se = x_pairing(eps, 4e6, sv, tv, 77 + k)
        ax = analytic_x(eps)
        rl.append(np.linalg.norm(num - ax) * lam / eps ** 0.6)
    fit = np.polyfit(le, np.log(np.array(rl) / le**2), 1)[0]
    print(f"s={sv} t={tv}: x res_norm={['%.2f' % v for v in rl]} fit={fit:.3f}")
