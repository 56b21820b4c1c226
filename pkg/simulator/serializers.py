from rest_framework import serializers

from scheduler.serializers import DeadlineVerdictSerializer


class ErrorMetricsSerializer(serializers.Serializer):
    direction = serializers.CharField()
    symbol = serializers.IntegerField()
    max_abs = serializers.FloatField()
    rel_fro = serializers.FloatField()
    tolerance = serializers.FloatField()
    ok = serializers.BooleanField()


class FrameResultSerializer(serializers.Serializer):
    frame = serializers.IntegerField()
    oracle_ok = serializers.BooleanField()
    deadlines_met = serializers.BooleanField()
    max_delay = serializers.FloatField()
    peak_buffered = serializers.IntegerField()
    inversion_start = serializers.FloatField(allow_null=True)
    inversion_end = serializers.FloatField(allow_null=True)
    events = serializers.SerializerMethodField()
    ops_per_node = serializers.SerializerMethodField()
    metrics = ErrorMetricsSerializer(many=True)
    verdicts = DeadlineVerdictSerializer(many=True)

    def get_events(self, obj) -> int:
        return len(obj.events)

    def get_ops_per_node(self, obj) -> dict:
        return {str(node): tally.total for node, tally in sorted(obj.tallies.items())}


class SweepReportSerializer(serializers.Serializer):
    frames = serializers.IntegerField()
    backlog_ok = serializers.BooleanField()
    ok = serializers.BooleanField()
    peak_buffered = serializers.ListField(child=serializers.IntegerField())
    violations = serializers.ListField(child=serializers.ListField(child=serializers.IntegerField()))
    results = FrameResultSerializer(many=True)
