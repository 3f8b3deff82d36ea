"""Line-oriented structured text used by snapshot files and the HTTP API.

Two constructs only:

    key: single-line value
    >>> name
    any multi-line payload
    <<<

Scalar keys may repeat; blocks may repeat. Order is preserved. The format
is deliberately dumb so the transcript and plot codecs can embed their
canonical text unchanged and files stay diffable.
"""

from __future__ import annotations

from dataclasses import dataclass

BLOCK_OPEN = ">>> "
BLOCK_CLOSE = "<<<"


class WireError(ValueError):
    pass


@dataclass(frozen=True)
class WireItem:
    key: str
    value: str
    is_block: bool = False


def render_wire(items: list[WireItem]) -> str:
    lines: list[str] = []
    for item in items:
        if item.is_block:
            for payload_line in item.value.split("\n"):
                if payload_line.strip() == BLOCK_CLOSE:
                    raise WireError(f"block {item.key!r} payload contains the close marker")
            lines.append(f"{BLOCK_OPEN}{item.key}")
            if item.value:
                lines.append(item.value)
            lines.append(BLOCK_CLOSE)
        else:
            if "\n" in item.value:
                raise WireError(f"scalar {item.key!r} must be single-line")
            lines.append(f"{item.key}: {item.value}".rstrip())
    return "\n".join(lines) + "\n"


def parse_wire(text: str) -> list[WireItem]:
    items: list[WireItem] = []
    block_key: str | None = None
    block_lines: list[str] = []
    for line in text.replace("\r\n", "\n").split("\n"):
        if block_key is not None:
            if line.strip() == BLOCK_CLOSE:
                items.append(WireItem(block_key, "\n".join(block_lines), True))
                block_key = None
                block_lines = []
            else:
                block_lines.append(line)
            continue
        if line.startswith(BLOCK_OPEN):
            block_key = line[len(BLOCK_OPEN):].strip()
            continue
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise WireError(f"unparseable line: {line!r}")
        items.append(WireItem(key.strip(), value.strip(), False))
    if block_key is not None:
        raise WireError(f"unterminated block {block_key!r}")
    return items


def first(items: list[WireItem], key: str, default: str | None = None) -> str | None:
    for item in items:
        if item.key == key:
            return item.value
    return default


def require(items: list[WireItem], key: str) -> str:
    value = first(items, key)
    if value is None:
        raise WireError(f"missing required key {key!r}")
    return value


def all_of(items: list[WireItem], key: str) -> list[str]:
    return [item.value for item in items if item.key == key]
