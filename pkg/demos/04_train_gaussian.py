"""Fitting N(0, 1) with small alpha-GANs and comparing orders.

With the default plain SGD at learning rate 2e-4 the networks move slowly;
pass ``adam`` as the first argument to see the distributions actually meet.

Run: python demos/04_train_gaussian.py [sgd|adam] [epochs]
"""

import sys

from alphagan.train import TrainConfig, train

optimizer = sys.argv[1] if len(sys.argv) > 1 else "sgd"
epochs = int(sys.argv[2]) if len(sys.argv) > 2 else 4000

for alpha in (0.1, 1.0, 5.0):
    config = TrainConfig(alpha=alpha, epochs=epochs, seed=0, optimizer=optimizer, record_interval=epochs // 4)
    result = train(config, initial_record=True)
    print(f"alpha={alpha} ({optimizer})")
    for m in result.metrics:
        print(f"  epoch {m.epoch:>6}  W1={m.wasserstein1:.4f}  KS={m.ks_stat:.3f}  |D-0.5|={m.d_flatness:.4f}")
    hist = result.histograms[epochs]
    peak = max(hist, key=lambda row: row[3])
    print(f"  generated mode near [{peak[0]:.2f}, {peak[1]:.2f})")
