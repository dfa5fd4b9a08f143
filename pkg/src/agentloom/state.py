"""Compositional state persistence.

Any attribute of a :class:`StateModule` that is itself a StateModule is
included in ``state_dict()`` automatically; everything else opts in via
``register_state``. ``load_state_dict(state_dict())`` restores the
registered state of the whole nested hierarchy.
"""

from __future__ import annotations

from typing import Any, Callable

from .errors import StateError

Encoder = Callable[[Any], Any]
Decoder = Callable[[Any], Any]


class StateModule:
    def __init__(self) -> None:
        self._state_attrs: dict[str, tuple[Encoder | None, Decoder | None]] = {}

    def register_state(
        self,
        attr_name: str,
        to_state: Encoder | None = None,
        from_state: Decoder | None = None,
    ) -> None:
        """Mark an attribute for inclusion in the state dict.

        ``to_state``/``from_state`` convert to and from JSON-compatible
        values; omit them for attributes that already are.
        """
        if not hasattr(self, attr_name):
            raise StateError(f"cannot register unknown attribute {attr_name!r}")
        self._state_attrs[attr_name] = (to_state, from_state)

    def _child_modules(self) -> dict[str, "StateModule"]:
        children = {}
        for key, value in vars(self).items():
            if isinstance(value, StateModule) and key not in self._state_attrs:
                children[key] = value
        return children

    def state_dict(self) -> dict[str, Any]:
        state: dict[str, Any] = {}
        for name, (encode, _) in self._state_attrs.items():
            value = getattr(self, name)
            state[name] = encode(value) if encode else value
        for name, child in self._child_modules().items():
            state[name] = child.state_dict()
        return state

    def load_state_dict(self, state: dict[str, Any], strict: bool = True) -> None:
        """Restore registered attributes and nested modules from ``state``.

        With ``strict`` (the default), missing or extra keys raise a
        :class:`StateError` listing them.
        """
        if not isinstance(state, dict):
            raise StateError(f"state must be a dict, got {type(state).__name__}")
        expected = set(self._state_attrs) | set(self._child_modules())
        missing = expected - set(state)
        extra = set(state) - expected
        if strict and (missing or extra):
            raise StateError(
                f"state shape mismatch for {type(self).__name__}: "
                f"missing={sorted(missing)} extra={sorted(extra)}"
            )
        children = self._child_modules()
        for name, value in state.items():
            if name in children:
                children[name].load_state_dict(value, strict=strict)
            elif name in self._state_attrs:
                _, decode = self._state_attrs[name]
                setattr(self, name, decode(value) if decode else value)
