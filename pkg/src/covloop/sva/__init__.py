from .generator import design_resources, generate_property, merge_into_file, name_and_dedup
from .model import (
    ImplOp, PropKind, SvaProperty, Trace, body_text, check_form, check_signals,
    normalized_body, render_property,
)
from .parser import Macro, SvaFile, SvaResources, parse_sva, scan_resources

__all__ = [
    "design_resources", "generate_property", "merge_into_file", "name_and_dedup", "ImplOp",
    "PropKind", "SvaProperty", "Trace", "body_text", "check_form", "check_signals",
    "normalized_body", "render_property", "Macro", "SvaFile", "SvaResources", "parse_sva",
    "scan_resources",
]
