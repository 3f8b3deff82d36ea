"""Provider-backed distillation: segment summaries and plot generation.

Plot generation is a two-part affair: the language model writes the
title, summary, and ordered key events, while the NPC roster is appended
deterministically from the transcript; the model never decides the
roster. A malformed plot completion gets one automatic retry with the
same request (visible in the provider's log) before the failure
surfaces.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Sequence

from .plots import Plot, PlotParseFailure, extend_roster, parse_plot
from .prompts import build_plot_prompt, build_summary_prompt
from .providers import EmptyCompletion
from .transcript import Turn

PLOT_PARSE_RETRIES = 1


def summarize_history(
    prev_summary: str | None,
    segment: Sequence[Turn],
    opening_story: str,
    instructions: str,
    provider,
) -> str:
    """Summarize a story segment, folding in the previous summary."""
    if not segment:
        raise ValueError("cannot summarize an empty segment")
    request = build_summary_prompt(prev_summary, segment, opening_story, instructions)
    summary = provider.complete(request)
    if not summary.strip():
        raise EmptyCompletion("summarizer returned an empty completion")
    return summary.strip()


def generate_plot(prior_plot: Plot | None, segment: Sequence[Turn], provider) -> Plot:
    """Distill a segment (merged with any prior plot) into a plot whose
    roster is recomputed from the turns rather than taken from the model."""
    if not segment:
        raise ValueError("cannot generate a plot from an empty segment")
    request = build_plot_prompt(prior_plot, segment)

    last_failure: PlotParseFailure | None = None
    parsed: Plot | None = None
    for _ in range(PLOT_PARSE_RETRIES + 1):
        completion = provider.complete(request)
        if not completion.strip():
            raise EmptyCompletion("plot generation returned an empty completion")
        try:
            parsed = parse_plot(completion)
            break
        except PlotParseFailure as exc:
            last_failure = exc
    if parsed is None:
        assert last_failure is not None
        raise last_failure

    base = prior_plot.npc_roster if prior_plot is not None else ()
    roster = extend_roster(base, segment)
    return replace(parsed, npc_roster=roster)
