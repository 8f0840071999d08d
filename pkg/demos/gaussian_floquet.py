"""Gaussian wavepacket: no closed-form spectrum, so look at the band picture.

Writes the log-clipped Floquet diagram for three resolutions and reports the
number of band crossings, which should not depend on D. If matplotlib is
around the diagram is also saved as a PNG.
"""
import numpy as np

from periodic_nft import count_band_crossings, defocusing_spectra_sampling, floquet_diagram, gaussian_wavepacket
from periodic_nft.io import write_floquet

case = gaussian_wavepacket(q0=1.9, mu=1.0, sigma=2.0, ell=10.0)
diagrams = {}
for D in (512, 1024, 2048):
    fd = floquet_diagram(case.signal(D), -5, 5, 20001)
    diagrams[D] = fd
    print(f"D={D:5d}: {count_band_crossings(fd)} crossings of |Delta| = 1 in [-5, 5]")

write_floquet("gaussian_floquet.tsv", diagrams[1024])
edges = defocusing_spectra_sampling(case.signal(1024), -5, 5, G=2, L=20).main
print("main spectrum on [-5, 5]:", np.round(edges, 4))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("wrote gaussian_floquet.tsv")
else:
    fd = diagrams[1024]
    plt.figure(figsize=(8, 3))
    plt.plot(fd.z, fd.clipped, lw=0.8)
    plt.axhline(1, color="k", lw=0.5)
    plt.axhline(-1, color="k", lw=0.5)
    plt.plot(edges, np.sign(np.interp(edges, fd.z, fd.delta)), "r.", ms=4)
    plt.xlabel("z")
    plt.ylabel("clipped Delta")
    plt.tight_layout()
    plt.savefig("gaussian_floquet.png", dpi=120)
    print("wrote gaussian_floquet.tsv and gaussian_floquet.png")
