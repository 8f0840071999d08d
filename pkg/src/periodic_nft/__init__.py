"""Fast nonlinear Fourier transforms for periodic signals (NSE and AKNS)."""

from .discretize import (
    ABLOWITZ_LADIK,
    CRANK_NICOLSON,
    FORWARD_EULER,
    Exponential,
    FeasibilityError,
    Identity,
    Moebius,
    RationalMonodromy,
    Scheme,
    Signal,
    build_monodromy,
    eval_monodromy_direct,
)
from .nft import (
    DefocusingOnlyError,
    SpectrumFilter,
    SpectrumResult,
    count_band_crossings,
    defocusing_spectra_sampling,
    eigen_nft,
    filter_spectrum,
    floquet_diagram,
    main_spectrum_eigen,
    newton_search,
    spectrum_error,
)
from .oracles import gaussian_wavepacket, one_band_defocusing, plane_wave_focusing

__version__ = "0.1.0"
