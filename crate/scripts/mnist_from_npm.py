#!/usr/bin/env python3
"""Build an MNIST test-set IDX image file from the npm `mnist` package.

The package ships the 10000 MNIST test digits as per-digit JSON arrays of
pixel intensities in [0, 1] (three decimals). This script interleaves the
digits round-robin (0,1,...,9,0,1,...) so any prefix covers every class, and
writes `t10k-images-idx3-ubyte.gz` with pixels quantized back to bytes.

usage: npm pack mnist && tar xzf mnist-*.tgz
       python3 scripts/mnist_from_npm.py package/src/digits data/t10k-images-idx3-ubyte.gz
"""
import gzip
import json
import struct
import sys


def main(digits_dir, out_path):
    per_digit = []
    for d in range(10):
        with open(f"{digits_dir}/{d}.json") as f:
            flat = json.load(f)["data"]
        assert len(flat) % 784 == 0
        per_digit.append([flat[i:i + 784] for i in range(0, len(flat), 784)])

    images = []
    k = 0
    while any(k < len(p) for p in per_digit):
        for p in per_digit:
            if k < len(p):
                images.append(p[k])
        k += 1

    with gzip.GzipFile(out_path, "wb", mtime=0) as out:
        out.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            out.write(bytes(min(255, max(0, round(v * 255))) for v in img))
    print(f"wrote {len(images)} images to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
