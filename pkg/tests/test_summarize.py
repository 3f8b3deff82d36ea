from __future__ import annotations

import random

import pytest

from plotroom.plots import PlotParseFailure
from plotroom.providers import EmptyCompletion, ScriptedProvider
from plotroom.summarize import generate_plot, summarize_history
from plotroom.transcript import serialize_transcript
from support import rand_transcript

PLOT_COMPLETION = """title: The Knock
Plot summary:
Someone knocks; everything changes.
Key Events:
1. A knock at the door.
2. A warning is delivered.
"""


class TestSummarizeHistory:
    def test_segment_embedded_verbatim(self, template_doc):
        provider = ScriptedProvider(["A summary."])
        summarize_history(
            None, template_doc.live_turns, template_doc.opening_story, template_doc.instructions,
            provider,
        )
        request = provider.request_log[0]
        segment_text = serialize_transcript(template_doc.live_turns)
        assert f"What happened next:\n{segment_text}\n</story>" in request.user_messages[0]

    def test_passthrough(self, template_doc):
        provider = ScriptedProvider(["S"])
        out = summarize_history(
            None, template_doc.live_turns[:1], template_doc.opening_story,
            template_doc.instructions, provider,
        )
        assert out == "S"

    def test_chained_segments_feed_prior_summary(self):
        rng = random.Random(21)
        segments = [rand_transcript(rng, 4) or rand_transcript(rng, 4) for _ in range(3)]
        segments = [s for s in segments if s] or [rand_transcript(rng, 4)]
        provider = ScriptedProvider(["sum one", "sum two", "sum three"])
        summary = None
        for segment in segments:
            if not segment:
                continue
            summary = summarize_history(summary, segment, "open", "instruct", provider)
        outputs = ["sum one", "sum two", "sum three"][: len(provider.request_log)]
        for i, request in enumerate(provider.request_log[1:], 1):
            assert f"Summary of what happened before: {outputs[i - 1]}" in request.user_messages[0]

    def test_empty_segment_rejected(self):
        with pytest.raises(ValueError):
            summarize_history(None, [], "o", "i", ScriptedProvider([]))

    def test_empty_completion(self, template_doc):
        with pytest.raises(EmptyCompletion):
            summarize_history(
                None, template_doc.live_turns, "o", "i", ScriptedProvider(["  "])
            )


class TestGeneratePlot:
    def test_parses_sections_and_appends_roster(self, template_doc):
        provider = ScriptedProvider([PLOT_COMPLETION])
        plot = generate_plot(None, template_doc.live_turns, provider)
        assert plot.title == "The Knock"
        assert len(plot.key_events) == 2
        assert [s.npc_id for s in plot.npc_roster] == ["Neighbor"]
        # roster comes from the transcript fold, not the completion
        assert plot.npc_roster[0].latest["[Mood]"] == "Desperate and scared."

    def test_table_completion(self, shadows_plot_text, template_doc):
        provider = ScriptedProvider([shadows_plot_text])
        plot = generate_plot(None, template_doc.live_turns, provider)
        assert plot.title == "Shadows of Betrayal"
        assert len(plot.key_events) >= 2
        assert [s.npc_id for s in plot.npc_roster] == ["Neighbor"]

    def test_malformed_completion_retries_once(self, template_doc):
        provider = ScriptedProvider(["no sections here", PLOT_COMPLETION])
        plot = generate_plot(None, template_doc.live_turns, provider)
        assert plot.title == "The Knock"
        assert len(provider.request_log) == 2
        assert provider.request_log[0] == provider.request_log[1]

    def test_two_malformed_completions_surface(self, template_doc):
        provider = ScriptedProvider(["junk", "more junk"])
        with pytest.raises(PlotParseFailure):
            generate_plot(None, template_doc.live_turns, provider)

    def test_roster_equals_brute_force_scan(self):
        from test_plots import naive_roster

        rng = random.Random(414)
        for _ in range(200):
            turns = rand_transcript(rng)
            if not turns:
                continue
            provider = ScriptedProvider([PLOT_COMPLETION])
            plot = generate_plot(None, turns, provider)
            assert [(s.npc_id, s.latest) for s in plot.npc_roster] == naive_roster(turns)

    def test_prior_roster_merges(self, template_doc, shadows_plot):
        provider = ScriptedProvider([PLOT_COMPLETION])
        plot = generate_plot(shadows_plot, template_doc.live_turns, provider)
        snap = plot.npc_roster[0]
        assert snap.npc_id == "Neighbor"
        # prior plot's value overwritten by the transcript's later blocks
        assert snap.latest["[Persona]"] == "Brave, but also vulnerable."
