"""Strict parsing of model responses against the required JSON schema,
with a flagged one-shot lenient fallback for fenced code blocks."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass


class ResponseParseError(ValueError):
    """Base class; `kind` identifies the violation category."""

    kind = "error"


class MalformedResponseError(ResponseParseError):
    kind = "malformed"


class ExtraKeyError(ResponseParseError):
    kind = "extra_keys"


class WrongLengthError(ResponseParseError):
    kind = "wrong_length"


class NonNumericEntryError(ResponseParseError):
    kind = "non_numeric"


class OutOfRangeEntryError(ResponseParseError):
    kind = "out_of_range"


@dataclass(frozen=True)
class ParsedResponse:
    probabilities: tuple[float, ...]
    parse_mode: str   # "strict" | "lenient"


_FENCE_RE = re.compile(r"```[a-zA-Z0-9_-]*\s*\n?(.*?)\n?\s*```", re.DOTALL)


def _strict_parse(text: str, n_years: int) -> tuple[float, ...]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedResponseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedResponseError(
            f"top level must be an object, got {type(doc).__name__}")
    if set(doc.keys()) != {"response"}:
        raise ExtraKeyError(
            f"expected exactly one top-level key 'response', "
            f"got {sorted(doc.keys())}")
    response = doc["response"]
    if not isinstance(response, dict):
        raise MalformedResponseError("'response' must be an object")
    if set(response.keys()) != {"y_acc_vector"}:
        raise ExtraKeyError(
            f"expected exactly one key 'y_acc_vector' inside 'response', "
            f"got {sorted(response.keys())}")
    vector = response["y_acc_vector"]
    if not isinstance(vector, list):
        raise MalformedResponseError("'y_acc_vector' must be an array")
    if len(vector) != n_years:
        raise WrongLengthError(
            f"expected {n_years} probabilities, got {len(vector)}")
    values = []
    for i, v in enumerate(vector):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise NonNumericEntryError(
                f"entry {i} is {type(v).__name__}, not a number")
        if not 0.0 <= float(v) <= 1.0:
            raise OutOfRangeEntryError(
                f"entry {i} = {v} outside [0, 1]")
        values.append(float(v))
    return tuple(values)


def parse_response(text: str, n_years: int) -> ParsedResponse:
    """Parse {"response":{"y_acc_vector":[...]}} with exact key, length and
    range enforcement.

    If strict parsing fails and the text contains a fenced code block, one
    lenient retry parses the fenced content; the result is flagged with
    parse_mode="lenient".
    """
    try:
        return ParsedResponse(_strict_parse(text, n_years), "strict")
    except ResponseParseError as strict_error:
        match = _FENCE_RE.search(text)
        if match is None:
            raise
        try:
            return ParsedResponse(_strict_parse(match.group(1), n_years),
                                  "lenient")
        except ResponseParseError:
            raise strict_error from None
