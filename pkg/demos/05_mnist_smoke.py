"""A few epochs of alpha-GAN on 28x28 images.

Pass a path to an MNIST image file (IDX, optionally gzipped). Without one a
random synthetic IDX file is written and used, which only exercises the
pipeline.

Run: python demos/05_mnist_smoke.py [train-images-idx3-ubyte[.gz]]
"""

import sys
import tempfile
from pathlib import Path

import numpy as np

from alphagan.mnist import write_idx
from alphagan.train import TrainConfig, train

if len(sys.argv) > 1:
    path = Path(sys.argv[1])
else:
    pixels = np.random.default_rng(0).integers(0, 256, size=(512, 28, 28), dtype=np.uint8)
    path = write_idx(Path(tempfile.mkdtemp()) / "synthetic.idx", pixels)
    print(f"no image file given, using {path}")

for alpha in (0.1, 1.0):
    result = train(TrainConfig.mnist(path, alpha=alpha, max_images=512, epochs=5))
    losses = ", ".join(f"{m.d_loss:.3f}" for m in result.metrics)
    print(f"alpha={alpha}: discriminator loss per epoch {losses}")
