import pytest

from langtraj.synth import SynthConfig, generate_cohort


@pytest.fixture(scope="session")
def text_cohort():
    """75 subjects with full transcripts, about 10k words each."""
    return generate_cohort(SynthConfig(seed=11, n_subjects=75))


@pytest.fixture(scope="session")
def cohort_dir(tmp_path_factory, text_cohort):
    root = tmp_path_factory.mktemp("cohort")
    text_cohort.write(root)
    return root


@pytest.fixture()
def run_yaml(cohort_dir, tmp_path):
    def make(out="out", **extra):
        lines = [
            "inputs:",
            f"  transcripts: {cohort_dir / 'transcripts.jsonl'}",
            f"  pcl: {cohort_dir / 'pcl.csv'}",
            f"  demographics: {cohort_dir / 'demographics.csv'}",
            f"  bundle: {cohort_dir / 'bundle'}",
            f"out: {tmp_path / out}",
        ]
        lines += [f"{k}: {v}" for k, v in extra.items()]
        path = tmp_path / f"{out}.yaml"
        path.write_text("\n".join(lines) + "\n")
        return path

    return make


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
