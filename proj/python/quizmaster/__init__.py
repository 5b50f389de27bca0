"""Cooperative flag quiz game master."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Optional

from . import _quizmaster as _core
from ._quizmaster import (
    ArgumentError,
    ConfigError,
    IoError,
    LoadError,
    LookupError,
    ParseError,
    QuizmasterError,
    SessionStateError,
    TemplateError,
    UnsupportedError,
)

__all__ = [
    "Api", "Session", "load", "classify", "generate_question", "procedural_check", "diarised_check",
    "replay", "simulate", "data_dir", "QuizmasterError", "ArgumentError", "ConfigError", "IoError",
    "LoadError", "LookupError", "ParseError", "SessionStateError", "TemplateError", "UnsupportedError",
]


def data_dir() -> Path:
    """QUIZ_DATA_DIR if set, else the data shipped with the package."""
    env = os.environ.get("QUIZ_DATA_DIR")
    if env:
        return Path(env)
    here = Path(__file__).resolve().parent
    packaged = here / "data"
    if packaged.is_dir():
        return packaged
    # editable installs run from the source tree
    return here.parent.parent / "data"


_default = None


def load(path: Optional[os.PathLike] = None) -> _core.Resources:
    """Registry, NLU config and templates from a data directory."""
    global _default
    if path is not None:
        return _core.load_resources(Path(path))
    if _default is None:
        _default = _core.load_resources(data_dir())
    return _default


def classify(text: str, options: Iterable[str] = (), resources=None) -> dict:
    return json.loads(_core.classify(resources or load(), text, list(options)))


def generate_question(index: int, seed: int, resources=None) -> dict:
    return json.loads(_core.generate_question(resources or load(), index, seed))


procedural_check = _core.procedural_check


def diarised_check(answers) -> Optional[str]:
    """answers: (speaker, code) pairs in utterance order."""
    return _core.diarised_check(list(answers))


def replay(path, strategy="procedural", threshold=3, p_confusion=0.0, seed=0, resources=None) -> dict:
    return json.loads(_core.replay(resources or load(), str(path), strategy, threshold, p_confusion, seed))


def simulate(trials=1000, p_grid=(0.0, 0.1, 0.2, 0.3, 0.4, 0.5), seed=0, threshold=3, params=None,
             resources=None) -> list:
    params = Path(params) if params is not None else data_dir() / "player_model.json"
    return json.loads(_core.simulate(resources or load(), trials, list(p_grid), seed, threshold, params))


class Session:
    """One game, driven utterance by utterance."""

    def __init__(self, strategy="procedural", threshold=3, seed=0, resources=None):
        self._s = _core.Session(resources or load(), strategy, threshold, seed)
        self.opening = json.loads(self._s.opening())

    def say(self, speaker: str, text: str) -> dict:
        return json.loads(self._s.say(speaker, text))

    def state(self) -> dict:
        return json.loads(self._s.state())

    @property
    def finished(self) -> bool:
        return self._s.finished

    def log_jsonl(self) -> str:
        return self._s.log_jsonl()


class Api:
    """The HTTP session API without a socket: handle(method, path, body)."""

    def __init__(self, resources=None):
        self._api = _core.Api(resources or load())

    def handle(self, method: str, target: str, body=None):
        text = body if isinstance(body, str) else ("" if body is None else json.dumps(body))
        status, payload = self._api.handle(method, target, text)
        return status, json.loads(payload)

    def session_count(self) -> int:
        return self._api.session_count()
