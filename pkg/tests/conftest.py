"""Shared helpers for the test suite."""

import gzip
import os
from pathlib import Path

import numpy as np

from mndbn.core import Rng
from mndbn.rbm import Rbm

# Verdict lines recorded by the acceptance tests, echoed after the run so
# they are visible even though pytest captures per-test stdout.
ACCEPTANCE_VERDICTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.line(line)

# Candidate file names for the USPS text corpus inside MNDBN_DATA_DIR.
USPS_TRAIN_NAMES = ("zip.train", "zip.train.gz", "usps.train", "usps.train.gz")
USPS_TEST_NAMES = ("zip.test", "zip.test.gz", "usps.test", "usps.test.gz")


def random_rbm(seed, n_visible, n_hidden, std=1.0):
    r = Rng(seed)
    return Rbm(
        w=r.normal((n_visible, n_hidden), std=std),
        b_vis=r.normal((n_visible,), std=std),
        a_hid=r.normal((n_hidden,), std=std),
    )


def _find(dirpath, names):
    for name in names:
        p = dirpath / name
        if p.is_file():
            return p
    return None


def usps_paths():
    """Locate the USPS train/test files, or return None with a reason.

    Set MNDBN_DATA_DIR to a directory containing zip.train / zip.test
    (optionally gzipped) to enable the real-data acceptance tests.
    """
    root = os.environ.get("MNDBN_DATA_DIR")
    if not root:
        return None, "MNDBN_DATA_DIR is not set; USPS files unavailable"
    dirpath = Path(root)
    if not dirpath.is_dir():
        return None, f"MNDBN_DATA_DIR={root} is not a directory"
    train = _find(dirpath, USPS_TRAIN_NAMES)
    test = _find(dirpath, USPS_TEST_NAMES)
    if train is None or test is None:
        return None, (
            f"MNDBN_DATA_DIR={root} lacks USPS files "
            f"(looked for {USPS_TRAIN_NAMES} and {USPS_TEST_NAMES})"
        )
    return (train, test), ""


def write_gzip_text(path, text):
    with gzip.open(path, "wt") as fh:
        fh.write(text)


def flat_params(m):
    return np.concatenate([m.w.ravel(), m.b_vis, m.a_hid])
