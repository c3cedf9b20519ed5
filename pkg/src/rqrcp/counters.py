"""Flop and memory-traffic accounting.

Counters distinguish matrix-matrix (GEMM) work from matrix-vector (level-2)
work by kernel entry point; a multiply-add pair counts as 2 flops.  The
bytes-touched figure is a coarse estimate: 8 bytes per operand element read
plus output element written, accumulated at each kernel call.
"""

from dataclasses import dataclass


@dataclass
class OpCounters:
    gemm_flops: int = 0
    level2_flops: int = 0
    bytes_touched: int = 0
    resamples: int = 0

    def touch(self, *arrays):
        for a in arrays:
            self.bytes_touched += 8 * a.size

    def merge(self, other):
        self.gemm_flops += other.gemm_flops
        self.level2_flops += other.level2_flops
        self.bytes_touched += other.bytes_touched
        self.resamples += other.resamples
