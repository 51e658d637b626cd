"""Acceptance suite: one test per primary criterion, one PASS/FAIL line each."""

from __future__ import annotations

import pytest

from percolata.acceptance import CRITERIA


@pytest.mark.parametrize("number", sorted(CRITERIA), ids=lambda k: f"criterion_{k:02d}")
def test_criterion(number, capsys):
    res = CRITERIA[number]()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.summary
