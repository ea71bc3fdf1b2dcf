"""Antithetic-estimator measurement for the x-kind pairing + convention discrimination."""
import numpy as np
from scipy import special as sp

rng = np.random.default_rng(777)

n = 5
p = (n + 2) / (n - 2)
c0 = (n * (n - 2)) ** ((n - 2) / 4)
cp1 = c0 ** (2 * n / (n - 2))
cbar = (n - 2) / 2 ** (n - 1)
sig = 2 * np.pi ** (n / 2) / sp.gamma(n / 2)
S_n = cp1 * 0.5 * np.pi ** (n / 2) * sp.gamma(n / 2) / sp.gamma(n)
c2 = 0.5 * cp1 * sig * 0.5 * sp.beta(n / 2, 1.0)
sig2 = 2 * np.pi ** ((n - 1) / 2) / sp.gamma((n - 1) / 2)
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

def delta(x, a, lam):
    r2 = np.sum((x[..., : n - 1] - a) ** 2, axis=-1) + x[..., n - 1] ** 2
    return c0 * lam ** ((n - 2) / 2) / (1 + lam ** 2 * r2) ** ((n - 2) / 2)

def assemble(eps):
    lam = 1.0 / (c_l * eps)
    xs = gamma * eps ** ((n - 2) / n) * xibar
    return lam, xs, K_model(xs) ** (-(n - 2) / 4)

def run(eps, N, s_conv, t_conv, kinds=("alpha", "lam", "x")):
    lam, xs, al = assemble(eps)
    i = 0
    def Ktilde(x):
        xp = x[..., : n - 1]
        return K_z + s_conv * dK * x[..., n - 1] + 0.5 * t_conv * np.einsum("...i,ij,...j->...", xp, H, xp)
    def fvals(x):
        q = 0.5 * (delta(x, xs[0], lam) ** (p + 1) + delta(x, xs[1], lam) ** (p + 1)) / S_n
        d0 = delta(x, xs[0], lam); d1 = delta(x, xs[1], lam)
        u = al[0] * d0 + al[1] * d1
        core = al[0] * d0 ** p + al[1] * d1 ** p - Ktilde(x) * u ** (p - eps)
        r2 = np.sum((x[:, : n - 1] - xs[i]) ** 2, axis=1) + x[:, n - 1] ** 2
        w = 1 + lam * lam * r2
        out = {}
        if "alpha" in kinds: out["alpha"] = d0 * core / q
        if "lam" in kinds: out["lam"] = d0 * (n - 2) / 2 * (1 - lam * lam * r2) / w * core / q
        if "x" in kinds:
            for k in range(n - 1):
                out[f"x{k}"] = (n - 2) * lam * (x[:, k] - xs[i][k]) * d0 / w * core / q
        return out
    B = 1 << 18
    npairs = int(N // (2 * B * 2))  # per stratum
    acc = {}
    for j in range(2):
        sums = {}; sqs = {}; cnt = 0
        for b in range(npairs):
            g = rng.standard_normal((B, n + 1))
            w1 = g[:, 0] / np.linalg.norm(g, axis=1)
            tt = (1.0 - w1) / 2.0
            r = np.sqrt(tt / (1.0 - tt))
            d = rng.standard_normal((B, n))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            d[:, n - 1] = np.abs(d[:, n - 1])
            y = r[:, None] * d
            x = np.empty((B, n)); x[:, : n - 1] = xs[j] + y[:, : n - 1] / lam; x[:, n - 1] = y[:, n - 1] / lam
            xr = np.empty((B, n)); xr[:, : n - 1] = xs[j] - y[:, : n - 1] / lam; xr[:, n - 1] = y[:, n - 1] / lam
            fa = fvals(x); fb = fvals(xr)
            for k in fa:
                v = 0.5 * (fa[k] + fb[k])
                sums[k] = sums.get(k, 0.0) + v.sum()
                sqs[k] = sqs.get(k, 0.0) + (v * v).sum()
            cnt += B
        for k in sums:
            m = sums[k] / cnt
            var = (sqs[k] / cnt - m * m) / cnt
            mm, vv = acc.get(k, (0.0, 0.0))
            acc[k] = (mm + 0.5 * m, vv + 0.25 * var)
    return lam, xs, al, {k: (m, np.sqrt(v)) for k, (m, v) in acc.items()}

def analytic(eps):
    lam, xs, al = assemble(eps)
    Kxi = K_model(xs[0])
    a_alpha = al[0] * S_n * (1 - al[0] ** (p - 1) * Kxi)
    a_lam = al[0] ** p * (c4 * Kxi * eps - (c3 / lam) * dK)
    d2 = np.sum((xs[0] - xs[1]) ** 2)
    e = (2.0 + lam * lam * d2) ** ((2 - n) / 2)
    deps = (n - 2) * e ** (n / (n - 2)) * lam * lam * (xs[1] - xs[0])
    a_x = -al[1] * (c2 / lam) * deps - al[0] ** p * c5 * (H @ xs[0]) / lam
    return a_alpha, a_lam, a_x, lam, xs, al

print("== antithetic, s=-2, t=2 ==")
eps_list = [1e-2, 3e-3, 1e-3, 3e-4]
res = {"alpha": [], "lam": [], "x": []}
for eps in eps_list:
    lam, xs, al, out = run(eps, 4e6, -2.0, 2.0)
    aa, alm, ax, *_ = analytic(eps)
    nx = np.array([out[f"x{k}"][0] for k in range(n - 1)])
    sx = np.array([out[f"x{k}"][1] for k in range(n - 1)])
    rx = np.linalg.norm(nx - ax) * lam / eps ** 0.6
    sex = np.linalg.norm(sx) * lam / eps ** 0.6
    # leading-term scales
    scale_x = max(np.linalg.norm(al[1] * (c2 / lam) * (n-2)*( (2+lam*lam*np.sum((xs[0]-xs[1])**2))**(-n/(n-2)*(n-2)/2) )*lam*lam*np.linalg.norm(xs[1]-xs[0])), np.linalg.norm(al[0] ** p * c5 * (H @ xs[0]) / lam))
    print(f"eps={eps:8.1e} res_a={abs(out['alpha'][0]-aa):.3e}(se {out['alpha'][1]:.1e}) "
          f"res_l={abs(out['lam'][0]-alm):.3e}(se {out['lam'][1]:.1e}) res_xn={rx:.3e}(se {sex:.1e}) "
          f"raw_se_x={np.linalg.norm(sx):.2e} gate1%={0.01*scale_x:.2e}")
    res["alpha"].append(abs(out["alpha"][0] - aa)); res["lam"].append(abs(out["lam"][0] - alm)); res["x"].append(rx)

le = np.log(np.array(eps_list))
for name, logfac in [("alpha", 1), ("lam", 0), ("x", 2)]:
    r = np.array(res[name]); lf = np.abs(le) ** logfac
    print(f"fit {name}: {np.polyfit(le, np.log(r / lf), 1)[0]:.3f}")

print("== wrong conventions ==")
for (sv, tv) in [(-1.0, 2.0), (2.0, 2.0), (-2.0, 1.0)]:
    rl, rxn = [], []
    for eps in eps_list:
        lam, xs, al, out = run(eps, 1e6, sv, tv, kinds=("lam", "x"))
        aa, alm, ax, *_ = analytic(eps)
        nx = np.array([out[f"x{k}"][0] for k in range(n - 1)])
        rl.append(abs(out["lam"][0] - alm)); rxn.append(np.linalg.norm(nx - ax) * lam / eps ** 0.6)
    print(f"s={sv} t={tv}: fit lam={np.polyfit(le, np.log(rl), 1)[0]:.3f} fit x={np.polyfit(le, np.log(np.array(rxn)/np.abs(le)**2), 1)[0]:.3f}")
