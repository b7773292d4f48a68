from typing import Annotated, TypedDict
import operator


def merge_dicts(a: dict, b: dict) -> dict:
    merged = a.copy()
    merged.update(b)
    return merged


class LabState(TypedDict):
    configs: dict
    settings: object
    summary: dict
    results: Annotated[dict, merge_dicts]
    checks: Annotated[list, operator.add]
    diagnostics: Annotated[dict, merge_dicts]
    compiled: dict
    errors: Annotated[list, operator.add]
