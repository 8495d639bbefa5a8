from __future__ import annotations

import pytest

from swmat.model import PouKind
from swmat.project import ProjectError, parse_project
from synth import write_project


def test_plant_project_shape(plant_project):
    assert len(plant_project.pous) >= 4
    assert len(plant_project.tasks) == 1
    assert plant_project.tasks[0].entry == "main"
    main = plant_project.pou("main")
    assert main is not None and main.kind is PouKind.PROGRAM


def test_empty_directory_errors(tmp_path):
    with pytest.raises(ProjectError, match="no source files"):
        parse_project(tmp_path)


def test_duplicate_pou_across_files_names_both_paths(tmp_path):
    write_project(
        tmp_path,
        {
            "a.st": "FUNCTION_BLOCK Valve\nEND_FUNCTION_BLOCK\n",
            "b.st": "FUNCTION_BLOCK Valve\nEND_FUNCTION_BLOCK\n",
        },
    )
    with pytest.raises(ProjectError) as info:
        parse_project(tmp_path)
    assert "a.st" in str(info.value) and "b.st" in str(info.value)


def test_missing_task_file_warns(tmp_path):
    write_project(tmp_path, {"a.st": "PROGRAM p\nEND_PROGRAM\n"})
    project, diags = parse_project(tmp_path)
    assert project.tasks == ()
    assert any("zero tasks" in d.message for d in diags if d.severity == "warning")


def test_externals_become_stub_pous(tmp_path):
    write_project(
        tmp_path,
        {"a.st": "PROGRAM p\nDrive_lib();\nEND_PROGRAM\n"},
        tasks="task t cycle 10 entry p\n",
    )
    (tmp_path / "externals.txt").write_text("Drive_lib vendor\n", encoding="utf-8")
    project, diags = parse_project(tmp_path)
    stub = project.pou("Drive_lib")
    assert stub is not None and stub.stub and stub.group == "vendor"
    main = project.pou("p")
    assert main.call_sites[0].resolution.value == "direct_pou"


def test_complexity_filled_during_assembly(plant_project):
    main = plant_project.pou("main")
    # five case labels + five mode calls + three instance calls
    assert main.complexity == 13


def test_source_index_covers_every_pou(plant_project):
    for pou in plant_project.pous:
        assert pou.name in plant_project.source_index


def test_global_reads_resolved(plant_project):
    main = plant_project.pou("main")
    assert "_plcMod" in main.global_reads
    assert main.global_writes == frozenset()


def test_task_file_syntax_errors_reported(tmp_path):
    write_project(
        tmp_path,
        {"a.st": "PROGRAM p\nEND_PROGRAM\n"},
        tasks="task broken line\n",
    )
    _, diags = parse_project(tmp_path)
    assert any("task" in d.message for d in diags if d.severity == "error")


def test_concurrent_file_parsing_matches_sequential(plant_dir):
    # parse_file is pure, so a thread pool must agree with the serial pass
    from concurrent.futures import ThreadPoolExecutor

    from swmat.stparse import SourceFile, parse_file

    paths = sorted(p for p in plant_dir.iterdir() if p.suffix == ".st")
    sources = [SourceFile(str(p), p.read_text(encoding="utf-8")) for p in paths]
    serial = [parse_file(s) for s in sources]
    with ThreadPoolExecutor(max_workers=4) as pool:
        threaded = list(pool.map(parse_file, sources))
    for a, b in zip(serial, threaded):
        assert a.pous == b.pous
        assert a.globals == b.globals
