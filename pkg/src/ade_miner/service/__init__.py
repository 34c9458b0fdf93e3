"""HTTP service: URL-scheme parsing, search assembly and the JSON API."""
from .app import build_search_response, create_app, group_caption, trial_detail
from .params import (
    ParsedSearch,
    RESULT_SET_KINDS,
    SearchParamError,
    parse_search_params,
    serialize_query_spec,
)

__all__ = [
    "ParsedSearch",
    "RESULT_SET_KINDS",
    "SearchParamError",
    "build_search_response",
    "create_app",
    "group_caption",
    "parse_search_params",
    "serialize_query_spec",
    "trial_detail",
]
