"""What the temperature does to the label-word selection.

Each label position holds a distribution over the whole vocabulary. At high
temperature the distribution is mushy; as tau drops it collapses onto the
argmax, and the straight-through mode snaps it to an exact one-hot while
keeping the soft gradient. Run it, watch the max component climb.
"""

import numpy as np

from eventpivot.pivots import gumbel_noise, gumbel_softmax_select
from eventpivot.tensor import Tensor

rng = np.random.default_rng(0)

# three label positions, vocabulary of 8, arbitrary fixed logits
logits = Tensor(rng.normal(size=(3, 8)))
noise = gumbel_noise((3, 8), rng)  # fixed, so only tau changes below

print("tau      max component   entropy (nats)")
for tau in (5.0, 1.0, 0.5, 0.1, 0.01):
    dist, ids = gumbel_softmax_select(logits, tau, noise=noise, mode="soft")
    p = dist.data
    ent = float(-(p * np.log(np.maximum(p, 1e-300))).sum(axis=1).mean())
    print(f"{tau:5.2f}    {p.max(axis=1).round(4)}   {ent:.4f}")

st, ids = gumbel_softmax_select(logits, 0.5, noise=noise,
                                mode="straight_through")
print("\nstraight-through forward value is exactly one-hot:")
print(st.data)
print("selected ids:", ids)

# the hard argmax under Gumbel noise IS a categorical sample: frequencies
# over many draws recover softmax(logits)
probe = Tensor(np.log(np.array([[1.0, 2.0, 3.0]])).repeat(50_000, axis=0))
_, draws = gumbel_softmax_select(
    probe, 1.0, noise=gumbel_noise((50_000, 3), rng))
freq = np.bincount(draws, minlength=3) / len(draws)
print("\nargmax frequencies vs softmax probs:")
print("  sampled ", freq.round(4))
print("  expected", (np.array([1, 2, 3]) / 6).round(4))
