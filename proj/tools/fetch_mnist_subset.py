#!/usr/bin/env python3
"""Writes the 5000-image MNIST subset bundled with mlxtend as gzipped IDX files.

The full MNIST archives are the preferred input for `eipr`; this script exists
for machines that can reach a PyPI mirror but not the MNIST hosts.

    python3 tools/fetch_mnist_subset.py --out data/mnist5k
"""
import argparse
import gzip
import io
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

import numpy as np

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def find_wheel(workdir: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "mlxtend==0.24.0", "-d", str(workdir)],
        check=True,
    )
    wheels = sorted(workdir.glob("mlxtend-*.whl"))
    if not wheels:
        raise SystemExit("pip download did not produce an mlxtend wheel")
    return wheels[0]


def write_idx(path: pathlib.Path, array: np.ndarray) -> None:
    # IDX header: two zero bytes, dtype code (0x08 = ubyte), rank, then big-endian dims.
    header = struct.pack(">BBBB", 0, 0, 0x08, array.ndim)
    header += b"".join(struct.pack(">I", d) for d in array.shape)
    with gzip.GzipFile(path, "wb", mtime=0) as fh:
        fh.write(header)
        fh.write(array.astype(np.uint8).tobytes())


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/mnist5k")
    parser.add_argument("--wheel", help="existing mlxtend wheel (skips pip download)")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else find_wheel(pathlib.Path(tmp))
        raw = gzip.decompress(zipfile.ZipFile(wheel).read(MEMBER)).decode()

    table = np.loadtxt(io.StringIO(raw), delimiter=",", dtype=np.int64)
    images = table[:, :784].reshape(-1, 28, 28)
    labels = table[:, 784]

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_idx(out / "images-idx3-ubyte.gz", images)
    write_idx(out / "labels-idx1-ubyte.gz", labels)
    print(f"wrote {len(images)} images to {out}")


if __name__ == "__main__":
    main()
