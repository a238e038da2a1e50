"""Sample sink accumulation, window lifecycle, and CSV round-trips."""

import threading

import pytest

from gaslab.metrics import (MACRO_HEADER, MICRO_HEADER, CsvFormatError,
                            InstructionStat, MacroCategory, SampleSink,
                            WindowAggregate, merge_windows, read_macro_csv,
                            read_micro_csv, write_macro_csv, write_micro_csv)


def test_span_additivity():
    sink = SampleSink()
    sink.record_span(MacroCategory.EVM, 5)
    sink.record_span(MacroCategory.EVM, 5)
    window = sink.close_window(100)
    assert window.categories["EVM"] == 10


def test_span_isolation_between_categories():
    sink = SampleSink()
    sink.record_span(MacroCategory.EVM, 7)
    window = sink.close_window(100)
    assert window.categories.get("DB", 0) == 0
    assert window.categories["EVM"] == 7


def test_instruction_accumulation():
    sink = SampleSink()
    sink.record_instruction("ADD", 3, 11)
    sink.record_instruction("ADD", 3, 9)
    sink.record_instruction("SLOAD", 200, 1000)
    window = sink.close_window(10)
    assert window.instructions["ADD"] == InstructionStat(2, 6, 20)
    assert window.instructions["SLOAD"] == InstructionStat(1, 200, 1000)


def test_concurrent_recording_matches_sequential_sum():
    sink = SampleSink()
    per_thread = 1000
    threads = 8

    def worker(tid):
        for i in range(per_thread):
            sink.record_instruction("ADD", 3, tid + i)
            sink.record_span(MacroCategory.TX, tid + i)

    workers = [threading.Thread(target=worker, args=(t,))
               for t in range(threads)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()

    # sequential oracle
    expected_time = sum(t + i for t in range(threads)
                        for i in range(per_thread))
    window = sink.close_window(1)
    assert window.instructions["ADD"] == InstructionStat(
        threads * per_thread, 3 * threads * per_thread, expected_time)
    assert window.categories["TX"] == expected_time


def test_close_empty_window_is_all_zero():
    sink = SampleSink()
    window = sink.close_window(500)
    assert window.start == 0
    assert window.instructions == {}
    assert window.categories == {}


def test_two_windows_archive_in_order():
    sink = SampleSink()
    sink.record_instruction("ADD", 3, 5)
    sink.close_window(100)
    sink.record_instruction("MUL", 5, 7)
    sink.close_window(200)
    assert [w.start for w in sink.archive] == [0, 100]
    assert sink.archive[0].instructions["ADD"].count == 1
    assert "MUL" not in sink.archive[0].instructions
    assert sink.archive[1].instructions["MUL"].count == 1


def test_close_window_requires_increasing_start():
    sink = SampleSink(window_start=100)
    with pytest.raises(ValueError):
        sink.close_window(100)


def test_toggles_disable_recording():
    sink = SampleSink(micro_enabled=False, macro_enabled=False)
    sink.record_instruction("ADD", 3, 5)
    sink.record_span(MacroCategory.EVM, 5)
    window = sink.close_window(10)
    assert window.instructions == {} and window.categories == {}


def test_pre_aggregated_totals_merge():
    sink = SampleSink()
    sink.record_instruction_totals("SLOAD", 4, 800, 4000)
    sink.record_instruction_totals("SLOAD", 1, 200, 900)
    sink.record_instruction_totals("NOPE", 0, 0, 0)  # zero-count ignored
    window = sink.close_window(10)
    assert window.instructions["SLOAD"] == InstructionStat(5, 1000, 4900)
    assert "NOPE" not in window.instructions


# ---------------------------------------------------------------------------
# CSV round-trips
# ---------------------------------------------------------------------------

def sample_windows():
    return [
        WindowAggregate(0, {"ADD": InstructionStat(10, 30, 111),
                            "SLOAD": InstructionStat(2, 400, 12345)},
                        {"EVM": 999, "Total": 2000}),
        WindowAggregate(500, {"ADD": InstructionStat(7, 21, 90)},
                        {"EVM": 450, "Total": 1100}),
    ]


def test_micro_csv_round_trip(tmp_path):
    path = tmp_path / "micro.csv"
    write_micro_csv(sample_windows(), path)
    assert path.read_text().splitlines()[0] == MICRO_HEADER
    back = read_micro_csv(path)
    assert [w.start for w in back] == [0, 500]
    assert back[0].instructions == sample_windows()[0].instructions


def test_macro_csv_round_trip(tmp_path):
    path = tmp_path / "macro.csv"
    write_macro_csv(sample_windows(), path)
    assert path.read_text().splitlines()[0] == MACRO_HEADER
    back = read_macro_csv(path)
    assert back[0].categories == {"EVM": 999, "Total": 2000}
    assert back[1].categories == {"EVM": 450, "Total": 1100}


def test_merge_windows_joins_on_start():
    micro = [WindowAggregate(0, {"ADD": InstructionStat(1, 3, 9)}, {})]
    macro = [WindowAggregate(0, {}, {"EVM": 10}),
             WindowAggregate(500, {}, {"EVM": 20})]
    merged = merge_windows(micro, macro)
    assert merged[0].instructions["ADD"].count == 1
    assert merged[0].categories["EVM"] == 10
    assert merged[1].categories["EVM"] == 20


def test_comment_lines_are_ignored(tmp_path):
    path = tmp_path / "micro.csv"
    path.write_text("# provenance note\n" + MICRO_HEADER +
                    "\n0,ADD,1,3,9\n# trailing comment\n")
    windows = read_micro_csv(path)
    assert windows[0].instructions["ADD"] == InstructionStat(1, 3, 9)


@pytest.mark.parametrize("content,fragment", [
    ("bogus header\n0,ADD,1,3,9\n", "expected header"),
    (MICRO_HEADER + "\n0,ADD,1,3\n", "expected 5 fields"),
    (MICRO_HEADER + "\n0,ADD,x,3,9\n", "invalid literal"),
    (MICRO_HEADER + "\n0,ADD,-1,3,9\n", "negative"),
    (MICRO_HEADER + "\n", "no data rows"),
    ("", "missing header"),
])
def test_micro_csv_errors_carry_line_numbers(tmp_path, content, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(CsvFormatError) as excinfo:
        read_micro_csv(path)
    assert fragment in str(excinfo.value)
    assert excinfo.value.line_no >= 1


def test_macro_csv_rejects_unknown_category(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(MACRO_HEADER + "\n0,Bogus,5\n")
    with pytest.raises(CsvFormatError, match="unknown category"):
        read_macro_csv(path)


def test_window_aggregate_totals():
    window = sample_windows()[0]
    assert window.instruction_time_total() == 111 + 12345
    assert window.instruction_gas_total() == 30 + 400
