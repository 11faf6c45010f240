#!/usr/bin/env python3
"""Regenerate the bundled chain-data fixtures under data/.

Blocks: 1000 rows, generation times cycling 300/600/900 s.
Transactions: 1000 rows spread over three UTC days; i % 10 < 3 are below
the 0.0001 BTC threshold (L class), the rest at or above it (H class).
"""
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"
T0 = 1462060800  # 2016-05-01T00:00:00Z

L_FEES = ["0", "0.00001", "0.00005"]
H_FEES = ["0.0001", "0.0005", "0.001", "0.005", "0.01", "0.5", "2"]


def main():
    ROOT.mkdir(exist_ok=True)
    with open(ROOT / "sample_blocks.csv", "w", newline="\n") as f:
        f.write("height,timestamp,tx_count,size_bytes\n")
        t = T0
        for i in range(1000):
            if i:
                t += (300, 600, 900)[(i - 1) % 3]
            f.write(f"{400000 + i},{t},{1000 + (i % 5) * 100},{500000 + (i % 4) * 100000}\n")
    with open(ROOT / "sample_txs.csv", "w", newline="\n") as f:
        f.write("id,first_seen,confirmed_at,size_bytes,fee_btc\n")
        for i in range(1000):
            r = i % 10
            if r < 3:
                fee, tct = L_FEES[r], 3000 + 1000 * r
            else:
                fee, tct = H_FEES[r - 3], 300 + 300 * (r - 3)
            seen = T0 + 259 * i
            f.write(f"tx{i:04d},{seen},{seen + tct},{200 + (i % 5) * 100},{fee}\n")


if __name__ == "__main__":
    main()
