"""
Read-only mappings and the field records built on them.

A run configuration or a study row is a :py:class:`Record`: it validates its fields
once at construction and is then shared between worker threads as is.
"""
from typing import Any, ClassVar, Dict, Iterator, Mapping, TypeVar

from diskbio.errors import ConfigError


_Key = TypeVar("_Key")
_Val = TypeVar("_Val")


class ImmutableDict(Mapping[_Key, _Val]):
    """
    An immutable version of ``dict``.

    Mutating syntax (``del d[k]``, ``d[k] = v``) is prohibited,
    the union ``d | other`` returns a new dictionary.
    """

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        self._dict = dict(*args, **kwargs)

    def __getitem__(self, key: object) -> _Val:
        return self._dict[key]  # type: ignore[index]

    def __contains__(self, key: object) -> bool:
        return key in self._dict

    def __iter__(self) -> Iterator[_Key]:
        return iter(self._dict)

    def __len__(self) -> int:
        return len(self._dict)

    def __or__(self, other: Mapping[_Key, _Val]) -> "ImmutableDict[_Key, _Val]":
        new = dict(self._dict)
        new.update(other)
        return self.__class__(new)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._dict!r})"


class ImmutableADict(ImmutableDict[str, _Val]):
    """
    A subclass of ``ImmutableDict`` with values being accessible as attributes
    (e.g. ``d['a']`` is equivalent to ``d.a``).
    """

    def __getattr__(self, attr: str) -> _Val:
        # Private names are looked up before ``_dict`` exists (e.g. when unpickling)
        if attr.startswith("_"):
            raise AttributeError(attr)
        try:
            return self._dict[attr]
        except KeyError:
            raise AttributeError(attr) from None

    def with_(self, **kwds: _Val) -> "ImmutableADict[_Val]":
        if all(key in self._dict and self._dict[key] is val for key, val in kwds.items()):
            return self
        new = dict(self._dict)
        new.update(**kwds)
        return self.__class__(new)


class Record(ImmutableADict[Any]):
    """
    An ``ImmutableADict`` with a fixed set of fields.

    Subclasses list their fields and default values in ``defaults``,
    and can override :py:meth:`check` to validate the values.
    Unknown fields and failed checks raise :py:class:`~diskbio.errors.ConfigError`.
    """

    defaults: ClassVar[Dict[str, Any]] = {}

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        given = dict(*args, **kwargs)
        unknown = sorted(set(given) - set(self.defaults))
        if unknown:
            raise ConfigError(f"Unknown {self.__class__.__name__} field: {unknown[0]}")
        values = dict(self.defaults)
        values.update(given)
        super().__init__(values)
        self.check()

    def check(self) -> None:
        pass

    def __repr__(self) -> str:
        fields = ", ".join(f"{key}={val!r}" for key, val in self._dict.items())
        return f"{self.__class__.__name__}({fields})"
