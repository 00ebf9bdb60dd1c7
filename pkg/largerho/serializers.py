from rest_framework import serializers

from .exceptions import ConfigError
from .odesim import LambdaSchedule
from .runconfig import parse_schedule

BRANCH_CHOICES = ("symmetric", "asymmetric")


class PositiveFloatField(serializers.FloatField):
    default_error_messages = {"not_positive": "Ensure this value is greater than 0."}

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not value > 0:
            self.fail("not_positive")
        return value


# ---------------------------------------------------------------------------
# run configurations
# ---------------------------------------------------------------------------

class CommonConfigSerializer(serializers.Serializer):
    sigma = PositiveFloatField(required=False, allow_null=True)
    beta = PositiveFloatField(required=False, default=8.0 / 3.0)
    rho = PositiveFloatField(required=False, allow_null=True)
    lam = PositiveFloatField(required=False, allow_null=True)
    rtol = PositiveFloatField(required=False, default=1e-9)
    atol = PositiveFloatField(required=False, default=1e-9)
    seed = serializers.IntegerField(required=False, min_value=0, default=12345)
    jobs = serializers.IntegerField(required=False, min_value=-1, default=1)
    out = serializers.CharField(required=False, allow_null=True, allow_blank=True)

    def validate_jobs(self, value):
        if value == 0:
            raise serializers.ValidationError("jobs must be positive or -1 (all cores)")
        return value

    def validate(self, attrs):
        lam = attrs.get("lam")
        if lam is not None:
            sigma = lam * (attrs["beta"] + 2.0) - 1.0
            if attrs.get("sigma") is not None and abs(attrs["sigma"] - sigma) > 1e-12 * sigma:
                raise serializers.ValidationError(
                    f"sigma={attrs['sigma']} contradicts lambda={lam} at beta={attrs['beta']}"
                )
            if not sigma > 0:
                raise serializers.ValidationError(f"lambda={lam} gives sigma={sigma:.4g} <= 0")
            attrs["sigma"] = sigma
        elif attrs.get("sigma") is None:
            attrs["sigma"] = 10.0
        return attrs


class BranchConfigSerializer(CommonConfigSerializer):
    lambda_min = PositiveFloatField(required=False, default=0.7)
    lambda_max = PositiveFloatField(required=False, default=3.0)
    points = serializers.IntegerField(required=False, min_value=1, default=100)
    branch = serializers.ChoiceField(choices=BRANCH_CHOICES + ("both",), required=False, default="symmetric")
    fix = serializers.ChoiceField(choices=("beta", "sigma"), required=False, default="beta")
    transport = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs["lambda_min"] > attrs["lambda_max"]:
            raise serializers.ValidationError("lambda_min must not exceed lambda_max")
        return attrs


class SimulateConfigSerializer(CommonConfigSerializer):
    t_end = PositiveFloatField(required=False, default=100.0)
    t_transient = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    x0 = serializers.ListField(child=serializers.FloatField(), required=False, allow_null=True, min_length=3, max_length=3)
    frame = serializers.ChoiceField(choices=("original", "rescaled"), required=False, default="original")
    stride = serializers.IntegerField(required=False, min_value=1, default=1)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get("rho") is None:
            raise serializers.ValidationError({"rho": "simulate needs rho"})
        transient = attrs.get("t_transient")
        if transient is not None and transient >= attrs["t_end"]:
            raise serializers.ValidationError("t_transient must be below t_end")
        return attrs


class HysteresisConfigSerializer(CommonConfigSerializer):
    schedule = serializers.CharField(required=False, allow_null=True, allow_blank=True)
    lambda_min = PositiveFloatField(required=False, default=0.3)
    lambda_max = PositiveFloatField(required=False, default=2.4)
    t_end = PositiveFloatField(required=False, default=600.0)
    window = PositiveFloatField(required=False, default=5.0)
    spread_threshold = PositiveFloatField(required=False, default=0.05)
    jump_threshold = PositiveFloatField(required=False, default=0.2)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get("rho") is None:
            attrs["rho"] = 1000.0
        try:
            if attrs.get("schedule"):
                schedule = LambdaSchedule.from_breakpoints(parse_schedule(attrs["schedule"]))
            else:
                schedule = LambdaSchedule.parabolic(attrs["lambda_min"], attrs["lambda_max"], attrs["t_end"])
            attrs["schedule"] = schedule.validate(attrs["beta"]).describe()
        except ConfigError as exc:
            raise serializers.ValidationError({"schedule": str(exc)})
        attrs["lambda_schedule"] = schedule
        return attrs


class OrbitConfigSerializer(CommonConfigSerializer):
    branch = serializers.ChoiceField(choices=BRANCH_CHOICES, required=False, default="symmetric")
    sign = serializers.ChoiceField(choices=(1, -1), required=False, default=1)
    max_iterations = serializers.IntegerField(required=False, min_value=1, default=25)
    tol = PositiveFloatField(required=False, default=1e-10)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get("rho") is None:
            raise serializers.ValidationError({"rho": "orbit refinement needs rho"})
        return attrs


class OrbitSampleConfigSerializer(CommonConfigSerializer):
    branch = serializers.ChoiceField(choices=BRANCH_CHOICES, required=False, default="symmetric")
    sign = serializers.ChoiceField(choices=(1, -1), required=False, default=1)
    points = serializers.IntegerField(required=False, min_value=2, default=400)
    A = serializers.FloatField(required=False, allow_null=True)
    B = PositiveFloatField(required=False, allow_null=True)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if (attrs.get("A") is None) != (attrs.get("B") is None):
            raise serializers.ValidationError("give both A and B, or neither")
        return attrs


class VerifyConfigSerializer(CommonConfigSerializer):
    grid = serializers.IntegerField(required=False, min_value=10, default=10_000)
    N = serializers.IntegerField(required=False, min_value=9, default=2360)


class StenfloConfigSerializer(CommonConfigSerializer):
    s_rot = serializers.FloatField(required=False, default=1.0)
    chi0 = serializers.FloatField(required=False, default=0.1)
    t_end = PositiveFloatField(required=False, default=20.0)
    t_transient = serializers.FloatField(required=False, allow_null=True, min_value=0.0)
    orbit = serializers.BooleanField(required=False, default=False)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get("rho") is None:
            attrs["rho"] = 1e6
        return attrs


CONFIG_SERIALIZERS = {
    "branch": BranchConfigSerializer,
    "simulate": SimulateConfigSerializer,
    "hysteresis": HysteresisConfigSerializer,
    "orbit": OrbitConfigSerializer,
    "orbit_sample": OrbitSampleConfigSerializer,
    "verify": VerifyConfigSerializer,
    "stenflo": StenfloConfigSerializer,
}


def validate_config(command: str, data: dict) -> dict:
    """Validated config for a command; any field error becomes ConfigError."""
    serializer = CONFIG_SERIALIZERS[command](data=data)
    if not serializer.is_valid():
        problems = "; ".join(f"{field}: {' '.join(str(m) for m in messages)}" for field, messages in serializer.errors.items())
        raise ConfigError(f"invalid {command} configuration: {problems}")
    return dict(serializer.validated_data)


# ---------------------------------------------------------------------------
# result records
# ---------------------------------------------------------------------------

class BranchPointSerializer(serializers.Serializer):
    lam = serializers.FloatField()
    branch = serializers.CharField(source="branch.value")
    sigma = serializers.FloatField()
    beta = serializers.FloatField()
    k = serializers.FloatField()
    A = serializers.FloatField()
    B = serializers.FloatField()
    trDM = serializers.FloatField()
    detDM = serializers.FloatField()
    residuals = serializers.ListField(child=serializers.FloatField())
    transport_h = serializers.FloatField(allow_null=True)


class ComplexListField(serializers.Field):
    def to_representation(self, value):
        return [[complex(v).real, complex(v).imag] for v in value]


class PeriodicOrbitSerializer(serializers.Serializer):
    anchor = serializers.SerializerMethodField()
    period = serializers.FloatField()
    multipliers = ComplexListField()
    moduli = serializers.SerializerMethodField()
    trivial_multiplier = serializers.SerializerMethodField()
    symmetry = serializers.CharField(source="symmetry.value")
    stability = serializers.CharField(source="stability.value")
    converged_residual = serializers.FloatField()
    iterations = serializers.IntegerField()

    def get_anchor(self, obj):
        return [float(v) for v in obj.anchor.as_array()]

    def get_moduli(self, obj):
        return [abs(v) for v in obj.multipliers]

    def get_trivial_multiplier(self, obj):
        return [complex(obj.trivial_multiplier).real, complex(obj.trivial_multiplier).imag]


class MelnikovComparisonSerializer(serializers.Serializer):
    shooting = ComplexListField()
    predicted = ComplexListField()
    max_abs_error = serializers.FloatField()
    tolerance = serializers.FloatField()
    deviation = serializers.FloatField()
    informative = serializers.BooleanField()
    shooting_stability = serializers.CharField(source="shooting_stability.value")
    predicted_stability = serializers.CharField(source="predicted_stability.value")
    agrees = serializers.BooleanField()


class TransportSummarySerializer(serializers.Serializer):
    H = serializers.FloatField()
    beta_avg_z = serializers.FloatField()
    stderr_proxy = serializers.FloatField()
    window = serializers.FloatField()
    bound = serializers.FloatField()
    gap = serializers.FloatField()
    h_limit = serializers.FloatField(allow_null=True)
    proportionality = serializers.FloatField(allow_null=True)
    nusselt = serializers.FloatField(allow_null=True)


class HysteresisEventSerializer(serializers.Serializer):
    t = serializers.FloatField()
    lam = serializers.FloatField()
    from_regime = serializers.CharField(source="from_regime.value")
    to_regime = serializers.CharField(source="to_regime.value")
    relative_jump = serializers.FloatField()
    trigger = serializers.CharField()
    t_detected = serializers.FloatField()


class ClaimResultSerializer(serializers.Serializer):
    name = serializers.CharField()
    passed = serializers.BooleanField()
    worst_margin = serializers.FloatField()
    worst_at = serializers.FloatField(allow_null=True)
    detail = serializers.CharField()
