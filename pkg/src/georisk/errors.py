"""Exception hierarchy.

Every error raised for bad user input or bad data derives from
:class:`GeoRiskError`, which the command-line layer maps to exit code 1.
"""


class GeoRiskError(ValueError):
    pass


class MalformedRow(GeoRiskError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class DuplicateRegion(GeoRiskError):
    def __init__(self, region_id):
        self.region_id = region_id
        super().__init__(f"duplicate region_id {region_id!r}")


class RangeViolation(GeoRiskError):
    def __init__(self, field, value, region_id=None):
        self.field = field
        self.value = value
        where = f" (region {region_id})" if region_id is not None else ""
        super().__init__(f"{field}={value!r} out of range{where}")


class InvalidWeights(GeoRiskError):
    pass


class TooFewValues(GeoRiskError):
    pass


class TooFewRegions(GeoRiskError):
    pass


class LengthMismatch(GeoRiskError):
    pass


class OutOfRange(GeoRiskError):
    pass


class InvalidStep(GeoRiskError):
    pass


class InvalidStart(GeoRiskError):
    pass


class NonFiniteGradient(GeoRiskError):
    pass


class RankDeficient(GeoRiskError):
    pass


class NetworkError(GeoRiskError):
    pass


class SourceSchemaChanged(GeoRiskError):
    pass
