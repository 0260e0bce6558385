"""Independent reference values baked into the C++ tests.

Run: python3 tests/oracles/oracles.py
"""
import math

import numpy as np

M64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & M64
    return h


def fmix64(h: int) -> int:
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & M64
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & M64
    h ^= h >> 33
    return h


def cluster_hash(key: str, salt: int) -> int:
    return fmix64(fnv1a64(salt.to_bytes(8, "little") + key.encode()))


def hash_vectors():
    print("// cluster_hash vectors: key, salt, hash, cluster")
    for key, salt in [("a", 0), ("user-1", 0), ("user-1", 1), ("user-3", 0), ("user-4", 0), ("u0:0", 20240611),
                      ("alice@example.com", 42), ("\xe9t\xe9", 7), ("x" * 64, 0xFFFFFFFFFFFFFFFF)]:
        h = cluster_hash(key, salt)
        print(f'{{"{key}", {salt}ULL, 0x{h:016x}ULL, Cluster::{"C2" if h & 1 else "C1"}}},')
    print(f"fnv1a64('a') = 0x{fnv1a64(b'a'):016x}")


def hoeffding():
    n, alpha, level, lo, hi = 100, 0.75, 0.95, 0.0, 1.0
    w = np.array([alpha, 1 - alpha, -(1 - alpha), -alpha]) / (2 * alpha - 1)
    delta = 1 - level
    half = float(np.abs(w).sum()) * (hi - lo) * math.sqrt(math.log(2 / (delta / 4)) / (2 * n))
    print(f"hoeffding half-width n=100 alpha=0.75 level=0.95 range=1: {half!r}")


def ols_oracle():
    # Normal equations solved via Gauss-Jordan style elimination with numpy.
    X = np.array([[1, 1, 0.5, -1.0], [1, 0, 1.5, 2.0], [1, 1, -0.3, 0.7], [1, 0, 2.2, -1.4],
                  [1, 1, 0.9, 0.1], [1, 0, -1.1, 0.3], [1, 1, 0.4, 1.9], [1, 0, 0.0, -0.6]])
    y = np.array([2.0, -1.0, 0.5, 3.1, 1.7, -0.2, 2.9, 0.4])
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    r = y - X @ beta
    s2 = r @ r / (len(y) - X.shape[1])
    cov = s2 * np.linalg.inv(X.T @ X)
    print("ols beta (intercept, z, g1, g2):", [repr(float(b)) for b in beta])
    print("ols residual variance:", repr(float(s2)), "se(beta_z):", repr(float(math.sqrt(cov[1, 1]))))


def normal_quantile():
    from scipy.stats import norm
    print("z_0.975 =", repr(float(norm.ppf(0.975))))


if __name__ == "__main__":
    hash_vectors()
    hoeffding()
    ols_oracle()
    normal_quantile()


def fixture_estimates(path, alpha=0.75):
    import pandas as pd
    df = pd.read_csv(path)
    g = df.groupby(["cluster", "treatment"])["outcome"]
    m, v, n = g.mean(), g.var(ddof=1), g.count()
    cells = [("C1", "T1"), ("C1", "T2"), ("C2", "T1"), ("C2", "T2")]
    w = np.array([alpha, 1 - alpha, -(1 - alpha), -alpha]) / (2 * alpha - 1)
    te = float(sum(wi * m[c] for wi, c in zip(w, cells)))
    se = math.sqrt(sum(wi * wi * v[c] / n[c] for wi, c in zip(w, cells)))
    naive = df[df.treatment == "T1"].outcome.mean() - df[df.treatment == "T2"].outcome.mean()

    def beta(a, b):
        sub = df[((df.cluster == a[0]) & (df.treatment == a[1])) | ((df.cluster == b[0]) & (df.treatment == b[1]))]
        z = ((sub.cluster == a[0]) & (sub.treatment == a[1])).astype(float).to_numpy()
        X = np.column_stack([np.ones(len(sub)), z, sub[[c for c in df.columns if c.startswith("x")]].to_numpy()])
        return np.linalg.lstsq(X, sub.outcome.to_numpy(), rcond=None)[0][1]

    b1 = beta(("C1", "T1"), ("C2", "T2"))
    b2 = beta(("C2", "T1"), ("C1", "T2"))
    adj = (alpha * b1 + (alpha - 1) * b2) / (2 * alpha - 1)
    zall = (df.treatment == "T1").astype(float).to_numpy()
    Xall = np.column_stack([np.ones(len(df)), zall, df[[c for c in df.columns if c.startswith("x")]].to_numpy()])
    naive_adj = float(np.linalg.lstsq(Xall, df.outcome.to_numpy(), rcond=None)[0][1])
    print(f"fixture naive+adj={naive_adj!r}")
    print(f"fixture {path}: naive={float(naive)!r} corrected={te!r} se={se!r} corrected+adj={float(adj)!r}")
    print("cells n:", [int(n[c]) for c in cells])


if __name__ == "__main__":
    import os
    here = os.path.dirname(os.path.abspath(__file__))
    fixture_estimates(os.path.join(here, "..", "fixtures", "site1_p50_a75.csv"))
