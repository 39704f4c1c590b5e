"""Dynamic time warping on two toy sequences.

A sine and a time-warped, resampled copy of it: DTW recovers the monotone
correspondence between them, and the path converts to and from its 0/1
matrix form.
"""

import numpy as np

from wavewarp import alignment_error, dtw_align, path_to_matrix, validate_dtw_matrix

t = np.linspace(0, 2 * np.pi, 40)
X = np.sin(t)[:, None]
# the same curve traversed with a varying clock
warp_clock = np.sin(np.linspace(0, 2 * np.pi, 55) / 2) * 2 * np.pi
Y = np.sin(warp_clock)[:, None]

path, cost = dtw_align(X, Y)
print(f"aligned {len(X)} x {len(Y)} samples, total cost {cost:.4f}")
print("first pairs:", [(int(i), int(j)) for i, j in path.pairs[:6]])
print("last pairs: ", [(int(i), int(j)) for i, j in path.pairs[-6:]])

W = path_to_matrix(path, len(X), len(Y))
print("matrix form valid:", validate_dtw_matrix(W))
print("ones on the path:", int(W.sum()), "== path length:", len(path))

# alignment error against the straight diagonal reference
diag, _ = dtw_align(np.arange(len(X))[:, None], np.arange(len(Y))[:, None])
print(f"area between warp curve and diagonal: {alignment_error(path, diag):.4f}")

# identical inputs align on the diagonal with zero cost
p0, c0 = dtw_align(X, X)
print(f"self-alignment: cost {c0}, diagonal: {bool((p0.pairs[:,0] == p0.pairs[:,1]).all())}")
