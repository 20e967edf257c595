"""mwdlab: matrix-parameterized Wigner-type time-frequency distributions.

Core entry points:

    blockmat   block algebra for the 2d x 2d transform matrices
    signals    analytic signal models, Fourier transforms, quadrature
    engine     phase-space fields B_A(f, g) (direct quadrature and FFT paths)
    cohen      Cohen-class kernels, Gaussian closed form, characterization
    identities executable checks for the covariance / Moyal / inversion / ...
    cli        the `mwdlab` command-line front end
"""

__version__ = "0.1.0"
