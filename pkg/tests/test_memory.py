from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from agentloom.errors import ValidationError
from agentloom.memory import (
    KeywordLongTermMemory,
    ShortTermMemory,
    extract_keywords,
)
from agentloom.message import Msg


def msg(text: str, name: str = "u", role: str = "user") -> Msg:
    return Msg(name, text, role)


class TestShortTermMemory:
    def test_add_preserves_order(self):
        mem = ShortTermMemory()
        msgs = [msg("a"), msg("b"), msg("c")]
        mem.add(msgs)
        assert mem.size() == 3
        assert mem.get_all() == msgs

    def test_re_add_same_id_is_noop(self):
        mem = ShortTermMemory()
        m = msg("a")
        mem.add(m)
        mem.add(m)
        assert mem.size() == 1

    def test_bulk_add_matches_input_sequence(self):
        mem = ShortTermMemory()
        msgs = [msg(f"m{i}") for i in range(10_000)]
        mem.add(msgs)
        assert mem.get_all() == msgs

    def test_get_range_half_open(self):
        mem = ShortTermMemory()
        a, b, c = msg("a"), msg("b"), msg("c")
        mem.add([a, b, c])
        assert mem.get_range(0, 2) == [a, b]
        assert mem.get_range(1, 1) == []

    def test_get_range_out_of_bounds(self):
        mem = ShortTermMemory()
        mem.add(msg("a"))
        with pytest.raises(IndexError):
            mem.get_range(0, 2)
        with pytest.raises(IndexError):
            mem.get_range(-1, 1)

    def test_delete_and_clear(self):
        mem = ShortTermMemory()
        a, b, c = msg("a"), msg("b"), msg("c")
        mem.add([a, b, c])
        mem.delete(1)
        assert mem.get_all() == [a, c]
        mem.clear()
        assert mem.size() == 0
        with pytest.raises(IndexError):
            mem.delete(0)

    def test_deleted_msg_can_be_re_added(self):
        mem = ShortTermMemory()
        a = msg("a")
        mem.add(a)
        mem.delete(0)
        mem.add(a)
        assert mem.get_all() == [a]

    @settings(max_examples=60, deadline=None)
    @given(
        ops=st.lists(
            st.one_of(
                st.tuples(st.just("add"), st.integers(0, 30)),
                st.tuples(st.just("delete"), st.integers(0, 40)),
                st.tuples(st.just("slice"), st.integers(0, 40)),
                st.tuples(st.just("clear"), st.just(0)),
            ),
            max_size=40,
        )
    )
    def test_behaves_as_reference_list(self, ops):
        """Random op sequences against a mirrored plain list."""
        mem = ShortTermMemory()
        mirror: list[Msg] = []
        counter = 0
        for op, arg in ops:
            if op == "add":
                m = msg(f"gen{counter}-{arg}")
                counter += 1
                mem.add(m)
                mirror.append(m)
            elif op == "delete":
                if arg < len(mirror):
                    mem.delete(arg)
                    del mirror[arg]
                else:
                    with pytest.raises(IndexError):
                        mem.delete(arg)
            elif op == "slice":
                start = min(arg, len(mirror))
                end = min(arg + 3, len(mirror))
                if start <= end:
                    assert mem.get_range(start, end) == mirror[start:end]
            else:
                mem.clear()
                mirror.clear()
            assert mem.get_all() == mirror

    def test_state_round_trip(self):
        mem = ShortTermMemory()
        mem.add([msg("a"), msg("b")])
        state = mem.state_dict()
        restored = ShortTermMemory()
        restored.load_state_dict(state)
        assert restored.get_all() == mem.get_all()
        # restored dedup index still works
        restored.add(mem.get_all()[0])
        assert restored.size() == 2


class TestKeywordExtraction:
    def test_stop_words_filtered_and_lowercased(self):
        assert extract_keywords("I prefer Dark MODE") == ["prefer", "dark", "mode"]

    def test_all_stopword_text_falls_back_to_raw_tokens(self):
        assert extract_keywords("I do") == ["i", "do"]


class TestLongTermMemory:
    @pytest.fixture()
    def store(self, tmp_path):
        return KeywordLongTermMemory(tmp_path / "ltm.jsonl")

    def test_record_extracts_keywords(self, store):
        count = store.record([msg("I prefer dark mode")])
        assert count == 1
        assert store.retrieve([msg("what was the dark preference?")]) == ["I prefer dark mode"]

    def test_empty_msg_list_records_nothing(self, store):
        assert store.record([]) == 0

    def test_non_text_msgs_skipped(self, store):
        m = Msg("a", [{"type": "tool_use", "id": "1", "name": "t", "input": {}}], "assistant")
        assert store.record([m]) == 0

    def test_retrieve_unique_overlap(self, store):
        store.record([msg("likes tea"), msg("hates noise")])
        assert store.retrieve([msg("tea please")]) == ["likes tea"]

    def test_retrieve_no_overlap_empty(self, store):
        store.record([msg("likes tea")])
        assert store.retrieve([msg("zebra")]) == []

    def test_ranking_matches_brute_force_oracle(self, store):
        rng = random.Random(13)
        vocabulary = [f"word{i}" for i in range(30)]
        texts = []
        for i in range(100):
            text = " ".join(rng.sample(vocabulary, rng.randint(1, 6))) + f" filler{i}"
            texts.append(text)
            store.record([msg(text)])
        for _ in range(20):
            query_terms = set(rng.sample(vocabulary, rng.randint(1, 5)))
            got = store.retrieve([msg(" ".join(query_terms))], k=10)

            # brute-force oracle: overlap count desc, newest (later index) first
            scored = []
            for index, text in enumerate(texts):
                overlap = len(query_terms & set(extract_keywords(text)))
                if overlap > 0:
                    scored.append((-overlap, -index, text))
            expected = [t for _, _, t in sorted(scored)[:10]]
            assert got == expected

    def test_agent_controlled_record_and_retrieve(self, store):
        confirmation = store.record_to_memory("user timezone UTC+8", ["timezone"])
        assert "timezone" in confirmation
        assert "user timezone UTC+8" in store.retrieve_from_memory(["timezone"])

    def test_retrieve_from_memory_empty_store(self, store):
        assert store.retrieve_from_memory(["anything"]) == []

    def test_empty_keywords_is_validation_error(self, store):
        with pytest.raises(ValidationError):
            store.record_to_memory("note", [])
        with pytest.raises(ValidationError):
            store.retrieve_from_memory([])

    def test_developer_and_agent_records_ranked_together(self, store):
        store.record([msg("project deadline friday")])
        store.record_to_memory("deadline moved to monday", ["deadline", "monday"])
        got = store.retrieve_from_memory(["deadline"])
        assert got == ["deadline moved to monday", "project deadline friday"]

    def test_every_record_retrievable_by_own_keywords(self, store):
        rng = random.Random(5)
        texts = [f"alpha{i} beta{i} gamma{i}" for i in range(25)]
        for text in texts:
            store.record([msg(text)])
        for text in texts:
            for keyword in extract_keywords(text):
                assert text in store.retrieve_from_memory([keyword])

    def test_persistence_across_instances(self, store, tmp_path):
        store.record([msg("persist me please")])
        reloaded = KeywordLongTermMemory(tmp_path / "ltm.jsonl")
        assert reloaded.retrieve_from_memory(["persist"]) == ["persist me please"]

    def test_clear_compacts_file(self, store, tmp_path):
        store.record([msg("temporary note")])
        store.clear()
        assert (tmp_path / "ltm.jsonl").read_text() == ""
        assert len(KeywordLongTermMemory(tmp_path / "ltm.jsonl")) == 0
