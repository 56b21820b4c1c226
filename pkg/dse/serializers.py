from rest_framework import serializers

from dimensioning.serializers import FiniteFloatField


class FeasibilityCellSerializer(serializers.Serializer):
    bandwidth_hz = serializers.FloatField()
    K = serializers.IntegerField()
    f_clk_hz = serializers.FloatField()
    nops_required = FiniteFloatField(allow_null=True)
    capacity = serializers.FloatField()
    feasible = serializers.BooleanField()
    limiter = serializers.CharField()


class FeasibilityGridSerializer(serializers.Serializer):
    mode = serializers.CharField(source='spec.mode')
    n_pe = serializers.IntegerField(source='spec.n_pe')
    bandwidths = serializers.ListField(source='spec.bandwidths', child=serializers.FloatField())
    f_clks = serializers.ListField(source='spec.f_clks', child=serializers.FloatField())
    max_terminals = serializers.SerializerMethodField()
    cells = FeasibilityCellSerializer(many=True)

    def get_max_terminals(self, obj) -> list:
        return [
            {'bandwidth_hz': b, 'f_clk_hz': f, 'K': obj.max_k(b, f)}
            for b in obj.spec.bandwidths for f in obj.spec.f_clks
        ]
