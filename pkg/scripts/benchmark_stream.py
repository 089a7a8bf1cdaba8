#!/usr/bin/env python3
"""Measure streaming throughput and state bounds of the expiration counter.

Runs a zero stream of length 2^20 through the scalar step loop and through
the vectorized batch runner, reporting steps/second for each plus the peak
number of live noise terms, the peak buffer length, and total noise redraws.
"""
import sys
import time

sys.path.insert(0, "src")

import numpy as np

from fadecount import (ExpirationCounter, MechanismParams, SeededNoise,
                       run_expiration)

T = 1 << 20
params = MechanismParams(1.0, 1.0, 16)

counter = ExpirationCounter(params, SeededNoise(0))
peak_active = peak_buffer = 0
t0 = time.perf_counter()
for _ in range(T):
    counter.step(0.0)
    if counter.active_noise_count > peak_active:
        peak_active = counter.active_noise_count
    if counter.buffer_len > peak_buffer:
        peak_buffer = counter.buffer_len
scalar_dt = time.perf_counter() - t0

t0 = time.perf_counter()
run_expiration(params, np.zeros(T), seed=0)
vector_dt = time.perf_counter() - t0

print(f"T = 2^20 = {T} steps, delay {params.delay}")
print(f"scalar loop:      {T/scalar_dt:,.0f} steps/s  ({scalar_dt:.2f} s)")
print(f"vectorized batch: {T/vector_dt:,.0f} steps/s  ({vector_dt:.2f} s)")
print(f"peak live noise terms: {peak_active}  (bound {T.bit_length()})")
print(f"peak buffer length:    {peak_buffer}  (bound {params.delay})")
print(f"total redraws:         {counter.redraws}  (bound {2*T})")
