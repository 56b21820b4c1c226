from rest_framework import serializers


class ScheduleEntrySerializer(serializers.Serializer):
    node = serializers.IntegerField()
    task = serializers.CharField()
    symbol = serializers.IntegerField()
    start = serializers.FloatField()
    end = serializers.FloatField()
    ops = serializers.FloatField()


class DeadlineVerdictSerializer(serializers.Serializer):
    symbol = serializers.IntegerField()
    node = serializers.IntegerField()
    completion = serializers.FloatField()
    deadline = serializers.FloatField()
    slack = serializers.FloatField()
    met = serializers.BooleanField()


class ScheduleSerializer(serializers.Serializer):
    node = serializers.IntegerField()
    n_hat = serializers.IntegerField()
    n_ul_pb = serializers.IntegerField()
    granularity = serializers.CharField()
    t_inv = serializers.FloatField()
    skew = serializers.FloatField()
    utilization = serializers.FloatField()
    horizon = serializers.FloatField()
    tail_end = serializers.FloatField()
    backlog_ok = serializers.BooleanField()
    feasible = serializers.BooleanField()
    entries = ScheduleEntrySerializer(many=True)
    verdicts = DeadlineVerdictSerializer(many=True)


class TreeScheduleSerializer(serializers.Serializer):
    granularity = serializers.CharField()
    inversion_start = serializers.FloatField(allow_null=True)
    inversion_end = serializers.FloatField(allow_null=True)
    feasible = serializers.BooleanField()
    schedules = ScheduleSerializer(many=True)
