"""Shared fixtures: the little C corpus, parsed once per session."""
import pathlib

import pytest

from specminer.frontend import load_program

CORPUS = pathlib.Path(__file__).parent / "corpus"


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS


@pytest.fixture(scope="session")
def dll_src():
    return (CORPUS / "dll.c").read_text()


@pytest.fixture(scope="session")
def dll_index(dll_src):
    return load_program(dll_src)


@pytest.fixture(scope="session")
def branch_index():
    return load_program((CORPUS / "branch.c").read_text())


@pytest.fixture(scope="session")
def setter_index():
    return load_program((CORPUS / "setter.c").read_text())
