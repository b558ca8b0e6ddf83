"""Angle unit conversion for serialization.

Files carry decimal degrees; memory carries radians.  A plain
float64 rad -> deg -> rad chain can drift by one ulp, so the conversion for
file io goes through high-precision decimal arithmetic: writing emits enough
digits to pin down the exact radian value, and parsing rounds the decimal
product correctly.  The result: save then load reproduces radians
bit-exactly, for any double.
"""

from decimal import Decimal, localcontext

# pi to 40 significant digits; far beyond double precision
_PI = Decimal("3.141592653589793238462643383279502884197")
_PREC = 40


def rad_to_deg_text(rad: float) -> str:
    """Decimal-degree text that parses back (via text_to_rad) to exactly rad."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        deg = Decimal(rad) * 180 / _PI
        return format(deg.normalize(), "f") if -1e16 < deg < 1e16 else str(deg)


def deg_text_to_rad(text: str) -> float:
    """Correctly-rounded radians of a decimal-degree string."""
    with localcontext() as ctx:
        ctx.prec = _PREC
        return float(Decimal(text) * _PI / 180)
