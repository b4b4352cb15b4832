"""Generator for the bundled synthetic classification dataset.

500 rows, five numeric features, one binary sensitive column ("group") and
a binary target ("label"). The label depends on a noisy linear score of the
features plus a mild group shift, so accuracy and statistical parity are
both nontrivial and respond to model capacity. Deterministic; the committed
CSV in data/ is exactly `make_frame(500, seed=7)`.
"""

from __future__ import annotations

import numpy as np
import pandas as pd


def make_frame(n_rows: int = 500, seed: int = 7) -> pd.DataFrame:
    rng = np.random.default_rng(seed)
    group = (rng.random(n_rows) < 0.4).astype(int)
    x = rng.standard_normal((n_rows, 5))
    x[:, 0] += 0.8 * group  # feature correlated with the sensitive group
    score = (
        1.2 * x[:, 0]
        - 0.9 * x[:, 1]
        + 0.6 * x[:, 2] * x[:, 3]
        + 0.4 * np.sin(2 * x[:, 4])
        + 0.5 * group
    )
    prob = 1.0 / (1.0 + np.exp(-score))
    label = (rng.random(n_rows) < prob).astype(int)
    frame = pd.DataFrame(
        {f"x{i + 1}": np.round(x[:, i], 6) for i in range(5)}
    )
    frame["group"] = group
    frame["label"] = label
    return frame


def main() -> None:
    from pathlib import Path

    out = Path(__file__).parent / "data" / "synthetic500.csv"
    out.parent.mkdir(exist_ok=True)
    make_frame().to_csv(out, index=False)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
