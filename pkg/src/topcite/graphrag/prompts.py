"""Three-tier prompt construction: static system and developer prompts plus
an XML user prompt built from the experiment configuration, the target
paper, and (optionally) masked neighbor contexts.

The user XML always parses back to its inputs exactly (see
parse_user_prompt); free text is XML-escaped, lists are JSON-formatted.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from xml.sax.saxutils import escape

from ..corpus import Paper

SYSTEM_PROMPT = """\
You are a scientific impact prediction engine for journal articles.

Your job is to estimate calibrated probabilities for whether a target paper \
will become a top paper within its journal at each requested horizon year.

Output rules

1. Output valid JSON only. No Markdown, no explanation, and no extra text.
2. The JSON must have exactly one top-level key: "response".
3. "response" must have exactly one key: "y_acc_vector".
4. The required structure is: {"response":{"y_acc_vector":[...]}}
5. "y_acc_vector" must contain numeric probabilities in [0,1].
6. Probabilities must be numbers, not strings.
7. The length of "y_acc_vector" must be exactly equal to \
<OUTPUT_SPEC><n_years>.
8. Do not reveal reasoning or chain-of-thought. Return only the final JSON.
9. Use only the information explicitly present in the XML input.
10. Do not use external facts or hidden assumptions about papers, authors, \
journals, venues, identifiers, files, or datasets.
"""

DEVELOPER_PROMPT = """\
Task

Predict, for the target journal article, the probability that it will be a \
top paper by accumulated citations at each requested horizon year.

Positive event

The positive event is defined by <CONFIG><q_value>:

- q_value is a quantile threshold.
- A paper is considered top if it belongs to the top (1 - q_value) fraction \
within its journal or context.
- Example: q_value = 0.8 means the positive event is being in the top 20%.

Required prediction

Return one probability for each horizon year listed in <TARGET><years>.

- The output vector is: y_acc_vector[h] = P(target paper is a top paper by \
accumulated citations up to horizon h)
- The order of the probabilities must follow the exact order of \
<TARGET><years>:
  - first probability -> first year in <TARGET><years>;
  - second probability -> second year in <TARGET><years>;
  - and so on.

Input information

The XML contains three main sections.

1) <CONFIG>

This section provides the general experimental context:

- graph_name: name of the graph or retrieval setting;
- retrieval_type: whether neighbors were retrieved by top-k \
similarity/context or randomly;
- K_NEIGHBORS: number of retrieved neighbors requested;
- is_directed and is_weighted: graph construction flags;
- q_value: quantile threshold defining the positive class.

2) <TARGET>

This section describes the paper to be predicted:

- title;
- abstract;
- publication year;
- domain, field, and subfield;
- years: horizon years to predict;
- n_years: exact number of probabilities required in the output;
- years to predict;
- maximum observable year.

Use the target title, abstract, publication year, field information, and \
requested horizons as the main basis for the prediction.

3) <NEIGHBORS>

This section contains contextual papers retrieved from the graph:

- each neighbor has metadata, text, and a y_acc_vector;
- neighbor y_acc_vector values are historical or contextual calibration \
examples;
- they can help estimate how papers with related metadata or text behaved \
under the same target definition;
- do not copy neighbor vectors directly;
- do not assume the target has the same outcome as any individual neighbor;
- do not use neighbor vector length to decide output length.

Prediction guidance

Estimate calibrated probabilities from the available evidence:

- target paper metadata and text;
- field, domain, and subfield context;
- publication year and requested horizon years;
- neighborhood context and neighbor y_acc_vector values, when informative.

Do not force monotonicity, thresholds, labels, or fixed patterns unless \
supported by the input. Output probabilities, not binary decisions.

Leakage prevention

- The target's true y_acc_vector is not provided and must not be inferred \
from hidden conventions.
- Do not treat identifiers, graph names, retrieval order, filenames, or \
dataset-specific patterns as labels.
- If any field appears to describe the target's observed future outcome, \
ignore it.

Output validation

Before producing the final JSON, ensure that:

- there is exactly one key inside "response";
- that key is "y_acc_vector";
- y_acc_vector has exactly <OUTPUT_SPEC><n_years> values;
- every value is a numeric probability between 0 and 1;
- no extra text is included.

If evidence is weak or incomplete, still return a valid probability vector \
with exactly <OUTPUT_SPEC><n_years> values.
"""


@dataclass(frozen=True)
class PromptConfig:
    """Experiment descriptors serialized into the <CONFIG> block."""

    graph_name: str
    retrieval_type: str       # "none" | "random" | "top_similar"
    k_neighbors: int
    is_directed: bool
    is_weighted: bool
    q_value: float            # quantile threshold, e.g. 0.8 for top 20%


@dataclass(frozen=True)
class NeighborContext:
    """A retrieved neighbor with its temporally masked history.

    years holds the disclosed horizon offsets (0..target_year - pub_year);
    y_acc_vector holds one value per disclosed offset.
    """

    paper: Paper
    years: tuple[int, ...]
    y_acc_vector: tuple[float, ...]

    def __post_init__(self):
        if len(self.years) != len(self.y_acc_vector):
            raise ValueError("years and y_acc_vector lengths differ")


@dataclass(frozen=True)
class PromptBundle:
    system: str
    developer: str
    user: str
    n_years: int
    target_id: str


def _fmt_bool(value: bool) -> str:
    return "true" if value else "false"


def _fmt_list(values) -> str:
    return json.dumps(list(values))


def _paper_block(ctx: NeighborContext) -> str:
    p = ctx.paper
    return f"""    <PAPER>
      <title>{escape(p.title)}</title>
      <abstract>{escape(p.abstract)}</abstract>
      <publication_year>{p.pub_year}</publication_year>
      <domain>{escape(p.domain)}</domain>
      <field>{escape(p.field)}</field>
      <subfield>{escape(p.subfield)}</subfield>
      <years>{_fmt_list(ctx.years)}</years>
      <y_acc_vector>{_fmt_list(ctx.y_acc_vector)}</y_acc_vector>
    </PAPER>"""


def build_prompt(cfg: PromptConfig, target: Paper, horizons: list[int],
                 max_year: int,
                 neighbors: list[NeighborContext] | None = None,
                 ) -> PromptBundle:
    """Assemble the three prompt tiers for one target paper.

    horizons are the requested offsets (years since publication); the
    <NEIGHBORS> block appears exactly when the retrieval strategy is not
    "none", even if no neighbor was retrievable.
    """
    if not horizons:
        raise ValueError("need at least one horizon to predict")
    n_years = len(horizons)
    years_to_predict = [target.pub_year + y for y in horizons]

    if cfg.retrieval_type == "none":
        neighbors_block = ""
    else:
        papers = "\n".join(_paper_block(c) for c in (neighbors or []))
        body = f"\n{papers}\n  " if papers else "\n  "
        neighbors_block = f"\n  <NEIGHBORS>{body}</NEIGHBORS>\n"

    user = f"""<REQUEST>

  <OUTPUT_SPEC>
    <required_json_schema>{{"response":{{"y_acc_vector":[...]}}}}</required_json_schema>
    <n_years>{n_years}</n_years>
    <required_vector_length>{n_years}</required_vector_length>
    <probability_order>same order as TARGET years</probability_order>
  </OUTPUT_SPEC>

  <CONFIG>
    <graph_name>{escape(cfg.graph_name)}</graph_name>
    <retrieval_type>{escape(cfg.retrieval_type)}</retrieval_type>
    <K_NEIGHBORS>{cfg.k_neighbors}</K_NEIGHBORS>
    <is_directed>{_fmt_bool(cfg.is_directed)}</is_directed>
    <is_weighted>{_fmt_bool(cfg.is_weighted)}</is_weighted>
    <q_value>{cfg.q_value}</q_value>
  </CONFIG>

  <TARGET>
    <title>{escape(target.title)}</title>
    <abstract>{escape(target.abstract)}</abstract>
    <publication_year>{target.pub_year}</publication_year>
    <domain>{escape(target.domain)}</domain>
    <field>{escape(target.field)}</field>
    <subfield>{escape(target.subfield)}</subfield>
    <years>{_fmt_list(horizons)}</years>
    <n_years>{n_years}</n_years>
    <years_to_predict>{_fmt_list(years_to_predict)}</years_to_predict>
    <max_year>{max_year}</max_year>
  </TARGET>
{neighbors_block}
</REQUEST>
"""
    return PromptBundle(system=SYSTEM_PROMPT, developer=DEVELOPER_PROMPT,
                        user=user, n_years=n_years, target_id=target.id)


def parse_user_prompt(user_xml: str) -> dict:
    """Parse an emitted user prompt back into its field values.

    Inverse of build_prompt's serialization; used by the audit checks and
    the oracle mock. Returns {"output_spec": ..., "config": ...,
    "target": ..., "neighbors": [...] or None}.
    """
    root = ET.fromstring(user_xml)
    if root.tag != "REQUEST":
        raise ValueError(f"expected <REQUEST> root, got <{root.tag}>")

    def text(elem, tag):
        child = elem.find(tag)
        if child is None:
            raise ValueError(f"missing <{tag}> element")
        return child.text or ""

    spec_el = root.find("OUTPUT_SPEC")
    config_el = root.find("CONFIG")
    target_el = root.find("TARGET")
    if spec_el is None or config_el is None or target_el is None:
        raise ValueError("missing OUTPUT_SPEC/CONFIG/TARGET section")

    output_spec = {
        "required_json_schema": text(spec_el, "required_json_schema"),
        "n_years": int(text(spec_el, "n_years")),
        "required_vector_length": int(text(spec_el, "required_vector_length")),
        "probability_order": text(spec_el, "probability_order"),
    }
    config = {
        "graph_name": text(config_el, "graph_name"),
        "retrieval_type": text(config_el, "retrieval_type"),
        "k_neighbors": int(text(config_el, "K_NEIGHBORS")),
        "is_directed": text(config_el, "is_directed") == "true",
        "is_weighted": text(config_el, "is_weighted") == "true",
        "q_value": float(text(config_el, "q_value")),
    }
    target = {
        "title": text(target_el, "title"),
        "abstract": text(target_el, "abstract"),
        "publication_year": int(text(target_el, "publication_year")),
        "domain": text(target_el, "domain"),
        "field": text(target_el, "field"),
        "subfield": text(target_el, "subfield"),
        "years": json.loads(text(target_el, "years")),
        "n_years": int(text(target_el, "n_years")),
        "years_to_predict": json.loads(text(target_el, "years_to_predict")),
        "max_year": int(text(target_el, "max_year")),
    }
    neighbors_el = root.find("NEIGHBORS")
    neighbors = None
    if neighbors_el is not None:
        neighbors = []
        for paper_el in neighbors_el.findall("PAPER"):
            neighbors.append({
                "title": text(paper_el, "title"),
                "abstract": text(paper_el, "abstract"),
                "publication_year": int(text(paper_el, "publication_year")),
                "domain": text(paper_el, "domain"),
                "field": text(paper_el, "field"),
                "subfield": text(paper_el, "subfield"),
                "years": json.loads(text(paper_el, "years")),
                "y_acc_vector": json.loads(text(paper_el, "y_acc_vector")),
            })
    return {"output_spec": output_spec, "config": config, "target": target,
            "neighbors": neighbors}
