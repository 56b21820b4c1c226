"""
Dimensioning views.

POST /api/dimension/      — report for a preset and/or explicit parameters
GET  /api/dimension/lte/  — report for the LTE-like preset
"""

import logging

from drf_spectacular.utils import extend_schema
from rest_framework import status
from rest_framework.permissions import AllowAny
from rest_framework.response import Response
from rest_framework.views import APIView

from dimensioning.cache import get_report, report_key, store_report
from dimensioning.serializers import DimensioningReportSerializer, DimensionRequestSerializer
from dimensioning.services.complexity_service import UnmeetableDeadline
from dimensioning.services.report_service import build_report
from system.services.config_service import preset, preset_mapping

logger = logging.getLogger(__name__)


def _dimension(mapping: dict, params, options: dict) -> Response:
    key = report_key(mapping, options)
    cached = get_report(key)
    if cached is not None:
        return Response(cached)

    try:
        report = build_report(params, **options)
    except UnmeetableDeadline as exc:
        return Response({
            'error': str(exc),
            'symbol': exc.symbol,
        }, status=status.HTTP_422_UNPROCESSABLE_ENTITY)

    data = DimensioningReportSerializer(report).data
    store_report(key, data)
    return Response(data)


class DimensionView(APIView):
    """
    POST /api/dimension/

    Dimension one parameter point.
    """
    permission_classes = [AllowAny]

    @extend_schema(
        summary='Dimension a parameter point',
        request=DimensionRequestSerializer,
        responses={200: DimensioningReportSerializer},
    )
    def post(self, request):
        serializer = DimensionRequestSerializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        data = serializer.validated_data
        options = {k: data[k] for k in ('n_hops', 'n_pe', 'n_ul_pb') if k in data}
        return _dimension(data['mapping'], data['system_params'], options)


class LteDimensionView(APIView):
    """
    GET /api/dimension/lte/

    Report for the LTE-like preset (N_hops=8).
    """
    permission_classes = [AllowAny]

    @extend_schema(summary='LTE-like preset report', responses={200: DimensioningReportSerializer})
    def get(self, request):
        return _dimension(preset_mapping('lte'), preset('lte'), {})
