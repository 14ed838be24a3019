"""Top-level package for Python Hardy Verify."""

# version from the installed distribution metadata
from importlib.metadata import version, PackageNotFoundError

try:
    __version__ = version("python-hardyverify")
except PackageNotFoundError:
    # source checkout without install
    __version__ = "0.0.0+unknown"

MIN_NUMPY_VERSION = "1.24.0"


def check_numpy_compatibility():
    """Verify numpy version compatibility."""
    import numpy

    if numpy.lib.NumpyVersion(numpy.__version__) < MIN_NUMPY_VERSION:
        raise RuntimeError(
            f"python_hardyverify requires numpy>={MIN_NUMPY_VERSION} "
            f"but found {numpy.__version__}"
        )


# Call on import
check_numpy_compatibility()
