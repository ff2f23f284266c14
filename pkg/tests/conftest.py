"""Shared fixtures."""

import pytest

from helpers import SEEDS


@pytest.fixture(params=SEEDS)
def seed(request):
    return request.param
