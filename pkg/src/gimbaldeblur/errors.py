"""Exception types shared across the package."""


class GimbalDeblurError(Exception):
    """Base class for errors raised by this package."""


class ImageFormatError(GimbalDeblurError):
    """A raster file is malformed (bad header, truncated payload, ...)."""


class UnsupportedFormatError(ImageFormatError):
    """A raster file is in a format this package does not handle."""


class IllPosedError(GimbalDeblurError):
    """An estimation problem has no usable solution (e.g. textureless input)."""


class LutMissError(GimbalDeblurError):
    """A steering rate was requested that the PSF lookup table does not hold."""

    def __init__(self, rate, available=()):
        self.rate = rate
        self.available = tuple(available)
        msg = f"no PSF entry for steering rate {rate} deg/s"
        if self.available:
            msg += f" (available: {', '.join(str(r) for r in self.available)})"
        super().__init__(msg)
