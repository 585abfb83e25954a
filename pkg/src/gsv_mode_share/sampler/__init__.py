"""
Road-network sampling and street-view request planning for GSV Mode Share.
"""
from gsv_mode_share.sampler.availability import (
    CaptureYearSummary,
    filter_by_availability,
    metadata_frame,
    summarize_capture_years,
)
from gsv_mode_share.sampler.clients import (
    FixtureMetadataClient,
    ImageMetadata,
    MetadataClient,
    StreetViewMetadataClient,
)
from gsv_mode_share.sampler.network import (
    RoadEdge,
    RoadNetwork,
    SamplePoint,
    haversine,
    load_road_network,
    sample_points,
)
from gsv_mode_share.sampler.planning import (
    HEADINGS,
    ImageRequest,
    image_id,
    plan_frame,
    plan_requests,
    points_frame,
)

__all__ = [
    'CaptureYearSummary', 'filter_by_availability', 'metadata_frame', 'summarize_capture_years',
    'FixtureMetadataClient', 'ImageMetadata', 'MetadataClient', 'StreetViewMetadataClient',
    'RoadEdge', 'RoadNetwork', 'SamplePoint', 'haversine', 'load_road_network', 'sample_points',
    'HEADINGS', 'ImageRequest', 'image_id', 'plan_frame', 'plan_requests', 'points_frame',
]
