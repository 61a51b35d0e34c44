from pathlib import Path

import pytest

import ritualsearch as rs

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
RITUALS = FIXTURES / "rituals"


@pytest.fixture(scope="module")
def engine():
    return rs.Engine.load(
        RITUALS / "concepts.xml",
        contexts=RITUALS / "contexts.xml",
        shots=RITUALS / "shots.xml",
        ontology=RITUALS / "ontology.xml",
    )


def test_load(engine):
    assert engine.n_videos == 5
    assert engine.n_concepts == 9
    assert engine.contexts[1] == "شعيرة الحج"
    assert engine.label(5, "en") == "Tawaf"


def test_suggest(engine):
    assert engine.suggest("طواف") == [(5, 1.0)]
    assert engine.suggest("the") == []


def test_search(engine):
    results = engine.search("طواف")
    assert [r["video_num"] for r in results] == ["00003", "00001"]
    assert results[0]["rank"] == 1
    assert results[0]["shot_repres"] == "shot00003_2"
    assert 0.0 < results[1]["score"] <= results[0]["score"] <= 1.0
    total = sum(w for _, w in results[0]["matched_concepts"])
    assert total == pytest.approx(results[0]["score"])
    assert engine.search("طواف", k=1)[0]["video_num"] == "00003"
    assert engine.search("x", concepts=[134], context=1)[0]["video_num"] == "00004"


def test_session(engine):
    session = engine.session("طواف")
    assert session.iteration == 0
    first = session.results()
    after = session.feedback(positives=["00003"], negatives=["00001"])
    assert session.iteration == 1
    # Concepts of the judged-relevant video join the query and widen the net.
    assert len(after) >= len(first)
    assert after[0]["video_num"] == "00003"
    assert session.query_vector[5] > 1.0
    with pytest.raises(rs.ValidationError):
        session.feedback(positives=["00005"])


def test_errors(engine):
    with pytest.raises(rs.IoError):
        rs.Engine.load(FIXTURES / "missing.xml")
    with pytest.raises(rs.ConfigError):
        rs.Engine.load(RITUALS / "concepts.xml", weights="tfidf")
    with pytest.raises(rs.LookupError):
        engine.search("x", concepts=[999])
    with pytest.raises(rs.DomainError):
        engine.search("طواف", k=0)
    assert issubclass(rs.ParseError, rs.RitualError)


def test_precision_recall():
    assert rs.precision_recall(["1", "2", "3", "4"], ["2", "00004", "9"], 4) == (0.5, 2 / 3)
    with pytest.raises(rs.EvaluationError):
        rs.precision_recall(["1"], [], 10)


def test_generated_corpus_feedback(tmp_path):
    paths = rs.generate_corpus(tmp_path, n_videos=400, n_concepts=40, n_contexts=4, queries=2, seed=3)
    engine = rs.Engine.load(paths["concepts"], contexts=paths["contexts"], shots=paths["shots"])
    assert engine.n_videos == 400
    relevant = {}
    for line in paths["qrels"].read_text().splitlines():
        qid, video = line.split("\t")
        relevant.setdefault(qid, []).append(video)
    curves, rankings = engine.simulate([1], relevant["q1"], iterations=3)
    assert len(curves) == len(rankings) == 3
    for curve in curves:
        recalls = [r for _, r, _ in curve]
        assert recalls == sorted(recalls)
    # alpha = 0 only rescales the query.
    _, flat = engine.simulate([1], relevant["q1"], alpha=0.0)
    assert flat[0] == flat[1] == flat[2]
