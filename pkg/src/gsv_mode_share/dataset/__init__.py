"""
City data ingestion for GSV Mode Share.
"""
from gsv_mode_share.dataset.geometry import (
    EARTH_RADIUS_M,
    Boundary,
    PopulationGrid,
    compute_population_density,
    polygon_area_km2,
    population_inside,
    ring_area_m2,
)
from gsv_mode_share.dataset.loaders import (
    CITY_TABLE_COLUMNS,
    attach_population,
    load_boundary,
    load_city_table,
    load_population_grid,
    write_city_table,
)
from gsv_mode_share.dataset.records import (
    COMMUTE_FACTOR,
    CityRecord,
    Mode,
    Role,
    SurveyScope,
    adjust_commute_share,
    harmonize_survey_scope,
    parse_survey_year,
)

__all__ = [
    'EARTH_RADIUS_M', 'Boundary', 'PopulationGrid', 'compute_population_density',
    'polygon_area_km2', 'population_inside', 'ring_area_m2',
    'CITY_TABLE_COLUMNS', 'attach_population', 'load_boundary', 'load_city_table',
    'load_population_grid', 'write_city_table',
    'COMMUTE_FACTOR', 'CityRecord', 'Mode', 'Role', 'SurveyScope',
    'adjust_commute_share', 'harmonize_survey_scope', 'parse_survey_year',
]
