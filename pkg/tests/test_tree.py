import pytest

from profstream.tree import Forest, TreeError


def test_thread_vs_process_structure():
    forest = Forest()
    forest.apply_spawn(0, 100, 100, 0, "work", None)
    forest.apply_spawn(100, 100, 101, 5, "worker", None)
    assert [r.tid for r in forest.roots] == [100]
    root = forest.nodes[100]
    assert [c.tid for c in root.children] == [101]
    assert forest.nodes[101].pid == root.pid  # same pid: a thread


def test_spawn_under_unknown_parent_makes_implicit_node():
    forest = Forest()
    forest.apply_spawn(999, 50, 101, 5, "kid", None)
    assert forest.nodes[999].implicit
    assert [c.tid for c in forest.nodes[999].children] == [101]
    assert not forest.nodes[101].implicit


def test_duplicate_tid_rejected():
    forest = Forest()
    forest.apply_spawn(0, 100, 101, 0, "a", None)
    with pytest.raises(TreeError) as err:
        forest.apply_spawn(0, 100, 101, 5, "b", None)
    assert err.value.code == "DuplicateTid"


def test_exec_appends_names_in_order():
    forest = Forest()
    forest.apply_spawn(0, 100, 100, 0, "work", None)
    forest.apply_exec(100, 10, "child-prog")
    forest.apply_exec(100, 20, "again")
    assert forest.nodes[100].names == [(0, "work"), (10, "child-prog"), (20, "again")]


def test_exec_for_unknown_tid_creates_implicit_node():
    forest = Forest()
    forest.apply_exec(200, 10, "child-prog")
    node = forest.nodes[200]
    assert node.implicit and node.names == [(10, "child-prog")]


def test_exit_sets_lifetime():
    forest = Forest()
    forest.apply_spawn(0, 100, 101, 5, "w", None)
    forest.apply_exit(101, 90)
    node = forest.nodes[101]
    assert (node.spawn_t, node.exit_t) == (5, 90)


def test_exit_before_spawn_rejected():
    forest = Forest()
    forest.apply_spawn(0, 100, 101, 5, "w", None)
    with pytest.raises(TreeError) as err:
        forest.apply_exit(101, 3)
    assert err.value.code == "ExitBeforeSpawn"


def test_event_after_exit_rejected():
    forest = Forest()
    forest.apply_spawn(0, 100, 101, 5, "w", None)
    forest.apply_exit(101, 90)
    with pytest.raises(TreeError) as err:
        forest.check_live(101, 95)
    assert err.value.code == "EventAfterExit"


def test_finalize_closes_open_nodes():
    forest = Forest()
    forest.apply_spawn(0, 100, 100, 0, "w", None)
    forest.finalize(1000)
    node = forest.nodes[100]
    assert node.exit_t == 1000 and node.open_ended


def test_finalize_gives_implicit_nodes_their_first_event_time():
    forest = Forest()
    forest.touch(300, 40)
    forest.touch(300, 60)
    forest.finalize(1000)
    assert forest.nodes[300].spawn_t == 40


def test_finalize_empty_forest():
    forest = Forest()
    forest.finalize(1000)
    assert forest.as_obj() == {"roots": []}


def test_children_sorted_by_spawn_time_then_tid():
    forest = Forest()
    forest.apply_spawn(0, 1, 1, 0, "root", None)
    forest.apply_spawn(1, 1, 4, 20, "late", None)
    forest.apply_spawn(1, 1, 3, 10, "mid", None)
    forest.apply_spawn(1, 1, 2, 10, "mid2", None)
    forest.finalize(100)
    assert [c.tid for c in forest.nodes[1].children] == [2, 3, 4]


def test_replay_into_fresh_forest_is_identical():
    def build():
        forest = Forest()
        forest.apply_spawn(0, 100, 100, 0, "w", 3)
        forest.apply_spawn(100, 100, 101, 5, "t", None)
        forest.apply_exec(101, 7, "renamed")
        forest.apply_exit(101, 50)
        forest.finalize(60)
        return forest.as_obj()

    assert build() == build()
