"""Prototype: verify constants, conventions (s, t), and residual scaling orders
before committing to the C++ implementation.

n=5, m=2 throughout. Chart model Ktilde(x) = K_z + s*dK_dnu*x_n + (t/2)<H x', x'>.
Analytic formulas use H (= hessK1) literally.
"""
import numpy as np
from scipy import special as sp

rng = np.random.default_rng(12345)

n = 5
p = (n + 2) / (n - 2)
c0 = (n * (n - 2)) ** ((n - 2) / 4)
cp1 = c0 ** (2 * n / (n - 2))
cbar = (n - 2) / 2 ** (n - 1)

def sphere_area(d):  # area of S^{d-1} in R^d
    return 2 * np.pi ** (d / 2) / sp.gamma(d / 2)

sig = sphere_area(n)        # sigma_{n-1}
sig2 = sphere_area(n - 1)   # sigma_{n-2}

# closed forms
S_n = cp1 * 0.5 * np.pi ** (n / 2) * sp.gamma(n / 2) / sp.gamma(n)
c2 = 0.5 * cp1 * sig * 0.5 * sp.beta(n / 2, 1.0)
c3 = (n - 2) * cp1 * (sig2 / (n - 1)) * 0.5 * sp.gamma((n + 1) / 2) * sp.gamma((n - 1) / 2) / sp.gamma(n + 1)
# c4 radial integral = 0.5*(J(n/2+1,n+1) - J(n/2,n+1)), J(a,c)=B(a,c-a)(psi(c)-psi(c-a))
J1 = sp.beta(n / 2 + 1, n / 2) * (sp.digamma(n + 1) - sp.digamma(n / 2))
J2 = sp.beta(n / 2, n / 2 + 1) * (sp.digamma(n + 1) - sp.digamma(n / 2 + 1))
c4 = cp1 * (n - 2) ** 2 / 8 * sig * 0.5 * (J1 - J2)
c5 = cp1 * (n - 2) / n * sig * 0.5 * sp.beta((n + 2) / 2, n / 2)
print(f"S_n={S_n:.10g} c2={c2:.10g} c3={c3:.10g} c4={c4:.10g} c5={c5:.10g}")

# quadrature cross-check of the radial reductions
from scipy.integrate import quad
q_Sn = cp1 * 0.5 * sig * quad(lambda r: r**(n-1) * (1+r*r)**-n, 0, np.inf)[0]
q_c2 = 0.5 * cp1 * sig * quad(lambda r: r**(n-1) * (1+r*r)**(-(n+2)/2), 0, np.inf)[0]
q_c3 = (n-2) * cp1 * sig2/(n-1) * quad(lambda r: r**n * (r*r-1) * (1+r*r)**(-(n+1)), 0, np.inf)[0]
q_c4 = cp1 * (n-2)**2/8 * sig * quad(lambda r: r**(n-1) * (r*r-1) * np.log(1+r*r) * (1+r*r)**(-(n+1)), 0, np.inf)[0]
q_c5 = cp1 * (n-2)/n * sig * quad(lambda r: r**(n+1) * (1+r*r)**(-(n+1)), 0, np.inf)[0]
for name, a, b in [("S_n",S_n,q_Sn),("c2",c2,q_c2),("c3",c3,q_c3),("c4",c4,q_c4),("c5",c5,q_c5)]:
    print(f"  {name}: closed={a:.12g} quad={b:.12g} rel={abs(a-b)/abs(a):.2e}")

# model
K_z, dK = 1.0, 1.0
H = np.diag([2.0, 1.0, 1.0, 1.0])
lam_top = 2.0
xbar = (cbar / lam_top) ** (1 / n)
xibar = np.zeros((2, n - 1)); xibar[0, 0] = xbar; xibar[1, 0] = -xbar
c_l = c4 * K_z / (c3 * dK)
gamma = (c2 * K_z / c5 * c_l ** (n - 2)) ** (1 / n)
print(f"c_l={c_l:.6g} gamma={gamma:.6g} |xbar|={xbar:.6g}")

s_conv, t_conv = -2.0, 2.0

def Ktilde(x):
    xp = x[..., : n - 1]
    return K_z + s_conv * dK * x[..., n - 1] + 0.5 * t_conv * np.einsum("...i,ij,...j->...", xp, H, xp)

def K_model(xp):  # boundary model K(x_i)
    return K_z + 0.5 * np.einsum("...i,ij,...j->...", xp, H, xp)

def delta(x, a, lam):
    r2 = np.sum((x[..., : n - 1] - a) ** 2, axis=-1) + x[..., n - 1] ** 2
    return c0 * lam ** ((n - 2) / 2) / (1 + lam ** 2 * r2) ** ((n - 2) / 2)

def assemble(eps):
    lam = 1.0 / (c_l * eps)
    xs = gamma * eps ** ((n - 2) / n) * xibar  # (2, n-1)
    alphas = K_model(xs) ** (-(n - 2) / 4)
    return lam, xs, alphas

def eps_ij(lam, xs):
    d2 = np.sum((xs[0] - xs[1]) ** 2)
    return (2.0 + lam * lam * d2) ** ((2 - n) / 2)

def d_eps_dx(lam, xs):  # d eps_12 / d x_1
    e = eps_ij(lam, xs)
    return (n - 2) * e ** (n / (n - 2)) * lam * lam * (xs[1] - xs[0])

def sample_half(N, a, lam):
    """Sample x ~ delta_(a,lam)^{p+1}/S_n on the half space."""
    g = rng.standard_normal((N, n + 1))
    w1 = g[:, 0] / np.linalg.norm(g, axis=1)
    tt = (1.0 - w1) / 2.0
    r = np.sqrt(tt / (1.0 - tt))
    d = rng.standard_normal((N, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    d[:, n - 1] = np.abs(d[:, n - 1])
    y = r[:, None] * d
    x = np.zeros((N, n))
    x[:, : n - 1] = a + y[:, : n - 1] / lam
    x[:, n - 1] = y[:, n - 1] / lam
    return x

def qdens(x, lam, xs):
    return 0.5 * (delta(x, xs[0], lam) ** (p + 1) + delta(x, xs[1], lam) ** (p + 1)) / S_n

def pairings(eps, N):
    lam, xs, al = assemble(eps)
    i = 0
    vals = {k: [] for k in ["alpha", "lam", "x0", "x1", "x2", "x3", "energy"]}
    B = 1 << 19
    nb = int(N // (2 * B))
    for j in range(2):
        for b in range(nb):
            x = sample_half(B, xs[j], lam)
            q = qdens(x, lam, xs)
            d0 = delta(x, xs[0], lam); d1 = delta(x, xs[1], lam)
            u = al[0] * d0 + al[1] * d1
            Kt = Ktilde(x)
            sum_adp = al[0] * d0 ** p + al[1] * d1 ** p
            core = sum_adp - Kt * u ** (p - eps)
            di = d0
            r2 = np.sum((x[:, : n - 1] - xs[i]) ** 2, axis=1) + x[:, n - 1] ** 2
            w = 1 + lam * lam * r2
            h_alpha = di
            h_lam = di * (n - 2) / 2 * (1 - lam * lam * r2) / w
            f_a = h_alpha * core / q
            f_l = h_lam * core / q
            vals["alpha"].append(f_a)
            vals["lam"].append(f_l)
            for k in range(n - 1):
                h_x = (n - 2) * lam * (x[:, k] - xs[i][k]) * di / w
                vals[f"x{k}"].append(h_x * core / q)
            vals["energy"].append(Kt * u ** (p + 1) * (np.sum(x * x, axis=1) < 0.1 ** 2) / q)
    out = {}
    for k, v in vals.items():
        v = np.concatenate(v)
        mean = v.mean() / 2 * 2  # stratified equal weights: E = (1/2)(E_q0 + E_q1); blocks alternate strata
        # recompute properly: first half from stratum 0, second from stratum 1
        m0 = v[: len(v) // 2].mean(); m1 = v[len(v) // 2 :].mean()
        s0 = v[: len(v) // 2].std(ddof=1) / np.sqrt(len(v) // 2)
        s1 = v[len(v) // 2 :].std(ddof=1) / np.sqrt(len(v) // 2)
        out[k] = (0.5 * (m0 + m1), 0.5 * np.hypot(s0, s1))
    return lam, xs, al, out

def analytic(eps):
    lam, xs, al = assemble(eps)
    i, j = 0, 1
    Kxi = K_model(xs[i])
    a_alpha = al[i] * S_n * (1 - al[i] ** (p - 1) * Kxi)
    a_lam = al[i] ** p * c4 * Kxi * eps - al[i] ** p * (c3 / lam) * dK
    gradK = H @ xs[i]
    a_x = -al[j] * (c2 / lam) * d_eps_dx(lam, xs) - al[i] ** p * c5 * gradK / lam
    return a_alpha, a_lam, a_x

print("\nresidual scaling (s=-2, t=2):")
eps_list = [1e-2, 3e-3, 1e-3, 3e-4]
rows = []
for eps in eps_list:
    lam, xs, al, out = pairings(eps, 4e6)
    aa, alam, ax = analytic(eps)
    num_x = np.array([out[f"x{k}"][0] for k in range(n - 1)])
    se_x = np.array([out[f"x{k}"][1] for k in range(n - 1)])
    r_alpha = abs(out["alpha"][0] - aa)
    r_lam = abs(out["lam"][0] - alam)
    r_x = np.linalg.norm(num_x - ax) * lam / eps ** ((n - 2) / n)
    rows.append((eps, r_alpha, r_lam, r_x, out["alpha"][1], out["lam"][1], np.linalg.norm(se_x)*lam/eps**0.6, out["energy"][0], out["energy"][1]))
    print(f"eps={eps:8.1e} res_a={r_alpha:.3e}(se {out['alpha'][1]:.1e}) res_l={r_lam:.3e}(se {out['lam'][1]:.1e}) "
          f"res_x_norm={r_x:.3e}(se {np.linalg.norm(se_x)*lam/eps**0.6:.1e}) E={out['energy'][0]:.4f}±{out['energy'][1]:.4f}")
    print(f"   analytic: a={aa:.3e} l={alam:.3e} |x|={np.linalg.norm(ax):.3e}  numeric: a={out['alpha'][0]:.3e} l={out['lam'][0]:.3e} |x|={np.linalg.norm(num_x):.3e}")

le = np.log(np.array([r[0] for r in rows]))
for idx, name, logfac in [(1, "alpha", 1), (2, "lambda", 0), (3, "x-norm", 2)]:
    r = np.array([row[idx] for row in rows])
    lf = np.abs(np.log(np.array([row[0] for row in rows]))) ** logfac
    slope = np.polyfit(le, np.log(r / lf), 1)[0]
    print(f"fitted exponent {name}: {slope:.3f}")

E_expect = 2 * S_n / K_z ** ((n - 2) / 2)
print(f"energy m=2 eps=3e-4-ish: expect {E_expect:.4f}")
