"""Godunov errors against exact Riemann solutions on a range of grids."""

import sys

from nonlocal_ftl.cli import godunov_validation, godunov_validation_passes

m_list = [int(a) for a in sys.argv[1:]] or [128, 256, 512, 1024, 2048]
rows = godunov_validation(m_list)
for name, cells, err in rows:
    print(f"{name:12s} m={cells:5d}  L1={err:.5f}")
print("passes" if godunov_validation_passes(rows) else "FAILS")
