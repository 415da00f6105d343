"""GraphRAG prompting: neighbor retrieval with temporal masking, three-tier
prompt construction, strict response parsing, and offline/remote clients."""

from .clients import MockLlmClient, RemoteLlmClient, mock_llm
from .parsing import (ExtraKeyError, MalformedResponseError,
                      NonNumericEntryError, OutOfRangeEntryError,
                      ParsedResponse, ResponseParseError, WrongLengthError,
                      parse_response)
from .prompts import (DEVELOPER_PROMPT, SYSTEM_PROMPT, NeighborContext,
                      PromptBundle, PromptConfig, build_prompt,
                      parse_user_prompt)
from .runner import (NEIGHBOR_ENCODINGS, PredictionVector, RetrievalConfig,
                     RunAbortedError, RunRecord, load_predictions_csv,
                     mask_neighbor_history, retrieve_neighbors, run_graphrag,
                     sample_targets, write_predictions_csv)

__all__ = [
    "MockLlmClient", "RemoteLlmClient", "mock_llm", "ExtraKeyError",
    "MalformedResponseError", "NonNumericEntryError", "OutOfRangeEntryError",
    "ParsedResponse", "ResponseParseError", "WrongLengthError",
    "parse_response", "DEVELOPER_PROMPT", "SYSTEM_PROMPT", "NeighborContext",
    "PromptBundle", "PromptConfig", "build_prompt", "parse_user_prompt",
    "NEIGHBOR_ENCODINGS", "PredictionVector", "RetrievalConfig",
    "RunAbortedError", "RunRecord", "load_predictions_csv",
    "mask_neighbor_history", "retrieve_neighbors", "run_graphrag",
    "sample_targets", "write_predictions_csv",
]
