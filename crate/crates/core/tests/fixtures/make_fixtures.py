"""Regenerates the binary fixtures and the golden RNG stream in this directory.

Independent of the Rust code: xoshiro256** and SplitMix64 are written out
from their reference definitions, and the file formats are assembled with
struct.pack.
"""
import os
import struct

HERE = os.path.dirname(os.path.abspath(__file__))
M64 = (1 << 64) - 1


def splitmix64(state):
    while True:
        state = (state + 0x9E3779B97F4A7C15) & M64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        yield z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


def xoshiro256ss(seed):
    sm = splitmix64(seed)
    s = [next(sm) for _ in range(4)]
    while True:
        result = (rotl((s[1] * 5) & M64, 7) * 9) & M64
        t = (s[1] << 17) & M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
        yield result


def pixel(i, j):
    return (i * 37 + j * 11) % 256


def main():
    gen = xoshiro256ss(42)
    with open(os.path.join(HERE, "rng_seed42.txt"), "w") as f:
        for _ in range(16):
            f.write(f"{next(gen)}\n")

    n, rows, cols = 3, 4, 4
    with open(os.path.join(HERE, "tiny-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, rows, cols))
        f.write(bytes(pixel(i, j) for i in range(n) for j in range(rows * cols)))
    with open(os.path.join(HERE, "tiny-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(bytes([4, 0, 9]))

    with open(os.path.join(HERE, "tiny_cifar.bin"), "wb") as f:
        for i, label in enumerate([7, 2]):
            f.write(bytes([label]))
            f.write(bytes(pixel(i, j) for j in range(3072)))


if __name__ == "__main__":
    main()
