from __future__ import annotations

import random

import pytest

from plotroom.transcript import (
    DUPLICATE_TAG,
    EMPTY_NPC_ID,
    ORPHAN_CONTENT,
    PLAYER_TAG,
    UNTERMINATED_TAG,
    NpcBlock,
    PlayerTurn,
    Role,
    Severity,
    TranscriptError,
    Turn,
    TurnKind,
    UnknownTagVisibility,
    Visibility,
    VisibilityMap,
    canonical_tag,
    entry,
    game_turn,
    parse_transcript,
    player_turn,
    redact_turn,
    serialize_transcript,
    serialize_turn,
    tag_key,
    validate_turn,
    with_author,
)
from support import rand_transcript, rand_turn

TABLE_STORY = """Game:
Scene: You are sitting in your living room. You hear knocking on the door.

Player:
[Action] Open the door.
[Words] Hello?

Game:
Scene: You stand at the door, looking at your mysterious neighbor who seems to know more about you than she should. You feel a mix of fear and curiosity. Your heart is pounding, and you are not sure what to do next.
[ID] Neighbor:
[Backstory] She is a former spy who has gone rogue and is now trying to make amends for her past actions.
[Persona] Confident, but also a little anxious.
[Mood] Urgent and a little bit scared.
[Thought] I need to get them out of here before it's too late.
[Action] Takes a step forward and looks directly into your eyes.
[Words] "Please, you don't have much time. I know this might sound crazy, but you are in danger. Can you trust me?"

Player:
"""


class TestParse:
    def test_template_opening_turns(self):
        turns, diags = parse_transcript(TABLE_STORY)
        assert diags == []
        assert len(turns) == 3

        first, second, third = turns
        assert first.kind is TurnKind.GAME
        assert first.body.scene == "You are sitting in your living room. You hear knocking on the door."
        assert first.body.npc_blocks == ()

        assert second.kind is TurnKind.PLAYER
        assert second.body.get("Action") == "Open the door."
        assert second.body.get("Words") == "Hello?"

        assert third.kind is TurnKind.GAME
        assert len(third.body.npc_blocks) == 1
        block = third.body.npc_blocks[0]
        assert block.npc_id == "Neighbor"
        assert [e.name for e in block.entries] == [
            "[Backstory]", "[Persona]", "[Mood]", "[Thought]", "[Action]", "[Words]",
        ]
        assert block.get("Thought") == "I need to get them out of here before it's too late."

    def test_empty_input(self):
        turns, diags = parse_transcript("")
        assert turns == []
        assert diags == []

    def test_trailing_bare_header_is_a_cue_not_a_turn(self):
        turns, _ = parse_transcript("Game:\nScene: x.\n\nPlayer:")
        assert len(turns) == 1

    def test_orphan_content_lenient_vs_strict(self):
        turns, diags = parse_transcript("hello there\nGame:\nScene: x.")
        assert len(turns) == 1
        assert [d.code for d in diags] == [ORPHAN_CONTENT]
        with pytest.raises(TranscriptError):
            parse_transcript("hello there\nGame:\nScene: x.", strict=True)

    def test_duplicate_tag_in_block(self):
        text = "Game:\n[ID] Sam:\n[Mood] fine\n[Mood] bad"
        turns, diags = parse_transcript(text)
        assert [d.code for d in diags] == [DUPLICATE_TAG]
        block = turns[0].body.npc_blocks[0]
        assert block.get("Mood") == "fine"
        assert "[Mood] bad" in turns[0].body.freeform  # content kept, not silently dropped
        with pytest.raises(TranscriptError):
            parse_transcript(text, strict=True)

    def test_unterminated_tag(self):
        turns, diags = parse_transcript("Game:\n[ID] Sam:\n[Mood]\n[Words] hi")
        assert UNTERMINATED_TAG in [d.code for d in diags]
        assert turns[0].body.npc_blocks[0].get("Mood") == ""

    def test_multiline_value_continuation(self):
        turns, _ = parse_transcript("Player:\n[Words] First line\nsecond line\nthird line")
        assert turns[0].body.get("Words") == "First line\nsecond line\nthird line"

    def test_case_insensitive_tags_and_headers(self):
        turns, _ = parse_transcript("game:\nscene: a place.\n[id] Sam:\n[mood] gloomy")
        body = turns[0].body
        assert body.scene == "a place."
        assert body.npc_blocks[0].npc_id == "Sam"
        assert body.npc_blocks[0].entries[0].name == "[Mood]"

    def test_empty_npc_id(self):
        _, diags = parse_transcript("Game:\n[ID] :\n[Mood] x")
        assert EMPTY_NPC_ID in [d.code for d in diags]

    def test_freeform_preserves_unattributable_prose(self):
        turns, _ = parse_transcript("Game:\nsome stray narration\nScene: x.")
        assert turns[0].body.freeform == ("some stray narration",)
        assert turns[0].body.scene == "x."

    def test_crlf_input(self):
        turns, diags = parse_transcript("Game:\r\nScene: x.\r\n\r\nPlayer:\r\n[Words] hi\r\n")
        assert diags == []
        assert len(turns) == 2

    def test_lenient_parse_attributes_every_injected_line(self):
        # losslessness: junk injected anywhere lands in a scene, a value,
        # freeform, or an orphan diagnostic; nothing silently vanishes
        rng = random.Random(717)
        for _ in range(100):
            turns = rand_transcript(rng, max_turns=5)
            lines = serialize_transcript(turns).split("\n")
            junk = [f"stray{rng.randrange(10_000)} noise" for _ in range(rng.randint(1, 4))]
            for text in junk:
                lines.insert(rng.randint(0, len(lines)), text)
            parsed, diags = parse_transcript("\n".join(lines))
            haystack = serialize_transcript(parsed) + "".join(d.message for d in diags)
            for text in junk:
                assert text in haystack


class TestSerialize:
    def test_player_turn_canonical_form(self):
        t = player_turn([("Action", "Open the door."), ("Words", "Hello?")])
        assert serialize_turn(t) == "Player:\n[Action] Open the door.\n[Words] Hello?"

    def test_minimal_game_turn(self):
        assert serialize_turn(game_turn()) == "Game:"

    def test_block_header_has_trailing_colon(self):
        t = game_turn(blocks=[NpcBlock("Neighbor", (entry("Mood", "calm"),))])
        assert serialize_turn(t) == "Game:\n[ID] Neighbor:\n[Mood] calm"

    def test_raw_char_len_matches_serialization(self):
        rng = random.Random(7)
        for _ in range(50):
            t = rand_turn(rng)
            assert t.raw_char_len == len(serialize_turn(t))

    def test_roundtrip_property_200_transcripts(self):
        rng = random.Random(2024)
        for _ in range(200):
            turns = rand_transcript(rng)
            text = serialize_transcript(turns)
            parsed, diags = parse_transcript(text)
            assert parsed == turns
            assert not [d for d in diags if d.is_error()]

    def test_serialize_parse_identity_on_canonical_text(self, template_text):
        from plotroom.story import parse_story

        doc, _ = parse_story(template_text)
        canonical = serialize_transcript(doc.live_turns)
        reparsed, _ = parse_transcript(canonical)
        assert serialize_transcript(reparsed) == canonical


class TestValidate:
    def test_template_turns_are_clean(self):
        turns, _ = parse_transcript(TABLE_STORY)
        for turn in turns:
            assert validate_turn(turn) == []

    def test_duplicate_mood_in_constructed_block(self):
        t = game_turn(blocks=[NpcBlock("Sam", (entry("Mood", "a"), entry("Mood", "b")))])
        diags = validate_turn(t)
        assert [d.code for d in diags] == [DUPLICATE_TAG]
        assert diags[0].severity is Severity.ERROR

    def test_player_turn_tag_violation_is_a_warning(self):
        t = player_turn([("Mood", "sneaky")])
        diags = validate_turn(t)
        assert [d.code for d in diags] == [PLAYER_TAG]
        assert diags[0].severity is Severity.WARNING

    def test_fuzzed_turns_never_raise_and_reference_valid_lines(self):
        rng = random.Random(99)
        for _ in range(300):
            t = rand_turn(rng)
            lines = serialize_turn(t).count("\n") + 1
            for diag in validate_turn(t):
                assert 1 <= diag.line <= lines


class TestRedaction:
    def neighbor_turn(self):
        turns, _ = parse_transcript(TABLE_STORY)
        return turns[2]

    def test_player_sees_only_visible_tags(self):
        redacted = redact_turn(self.neighbor_turn(), Role.PLAYER)
        block = redacted.body.npc_blocks[0]
        assert block.npc_id == "Neighbor"
        assert [e.name for e in block.entries] == ["[Action]", "[Words]"]
        assert redacted.body.scene is not None

    def test_designer_view_is_identity(self):
        t = self.neighbor_turn()
        assert redact_turn(t, Role.DESIGNER) is t

    def test_idempotent(self):
        rng = random.Random(5)
        vis = VisibilityMap.default()
        for _ in range(100):
            t = rand_turn(rng)
            once = redact_turn(t, Role.PLAYER, vis)
            assert redact_turn(once, Role.PLAYER, vis) == once

    def test_custom_tags_default_hidden(self):
        t = game_turn(blocks=[NpcBlock("Sam", (entry("Secret Goal", "loot"), entry("Words", "hi")))])
        redacted = redact_turn(t, Role.PLAYER)
        assert [e.name for e in redacted.body.npc_blocks[0].entries] == ["[Words]"]

    def test_per_room_override(self):
        vis = VisibilityMap({"[Mood]": Visibility.PLAYER_VISIBLE})
        t = game_turn(blocks=[NpcBlock("Sam", (entry("Mood", "angry"), entry("Thought", "hm")))])
        redacted = redact_turn(t, Role.PLAYER, vis)
        assert [e.name for e in redacted.body.npc_blocks[0].entries] == ["[Mood]"]

    def test_unknown_tag_without_default_rule(self):
        vis = VisibilityMap(default_to_hidden=False)
        t = player_turn([("Stance", "wide")])
        with pytest.raises(UnknownTagVisibility):
            redact_turn(t, Role.PLAYER, vis)

    def test_soundness_no_hidden_entries_remain(self):
        rng = random.Random(13)
        vis = VisibilityMap.default()
        for _ in range(200):
            t = rand_turn(rng)
            redacted = redact_turn(t, Role.PLAYER, vis)
            entries = []
            if redacted.kind is TurnKind.GAME:
                for b in redacted.body.npc_blocks:
                    entries.extend(b.entries)
            else:
                entries.extend(redacted.body.entries)
            assert all(vis.is_visible(e.name) for e in entries)


class TestModel:
    def test_kind_body_mismatch_rejected(self):
        with pytest.raises(TypeError):
            Turn(TurnKind.GAME, PlayerTurn())

    def test_tag_canonicalization(self):
        assert canonical_tag("mood") == "[Mood]"
        assert canonical_tag("[FACIAL EXPRESSION]") == "[Facial Expression]"
        assert canonical_tag("Secret Goal") == "[Secret Goal]"
        assert tag_key("[Mood]") == tag_key(" mood ")

    def test_with_author(self):
        t = with_author(player_turn([("Words", "hi")]), "p1")
        assert t.body.author == "p1"
        with pytest.raises(ValueError):
            with_author(game_turn(), "p1")
