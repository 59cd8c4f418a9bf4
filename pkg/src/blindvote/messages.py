"""Transaction payloads and their wire encoding.

Each payload kind serializes to a fixed-order list of space-free string
fields. Integers use the lowercase-hex convention from ``blindsig``;
byte strings use plain hex with ``-`` standing for the empty string so
fields never vanish from a line.
"""

from __future__ import annotations

from dataclasses import dataclass

from .blindsig import hex_to_int, int_to_hex
from .errors import ParseError


def bytes_to_field(data: bytes) -> str:
    return data.hex() if data else "-"


def field_to_bytes(field: str) -> bytes:
    return b"" if field == "-" else bytes.fromhex(field)


@dataclass(frozen=True)
class Deploy:
    """Create an election contract with immutable parameters."""

    n: int
    e: int
    st: int
    ct: int
    et: int
    sealed: bool = False
    sealing_n: int | None = None
    sealing_e: int | None = None

    kind = "deploy"

    def fields(self) -> list[str]:
        out = [
            int_to_hex(self.n),
            int_to_hex(self.e),
            int_to_hex(self.st),
            int_to_hex(self.ct),
            int_to_hex(self.et),
            "1" if self.sealed else "0",
        ]
        if self.sealed:
            out += [int_to_hex(self.sealing_n), int_to_hex(self.sealing_e)]
        return out


@dataclass(frozen=True)
class Check:
    """Ask the contract to check an organizer signature (read-only)."""

    signed_blinded: int
    blinded: int

    kind = "check"

    def fields(self) -> list[str]:
        return [int_to_hex(self.signed_blinded), int_to_hex(self.blinded)]


@dataclass(frozen=True)
class Cast:
    """Submit a signed ballot with its one-time uuid."""

    signed: int
    ballot: bytes
    uuid: bytes

    kind = "cast"

    def fields(self) -> list[str]:
        return [int_to_hex(self.signed), bytes_to_field(self.ballot), self.uuid.hex()]


@dataclass(frozen=True)
class Publish:
    """Reveal the sealing private key after the vote window closes."""

    n: int
    d: int

    kind = "publish"

    def fields(self) -> list[str]:
        return [int_to_hex(self.n), int_to_hex(self.d)]


@dataclass(frozen=True)
class Tally:
    """Read the on-chain tally."""

    kind = "tally"

    def fields(self) -> list[str]:
        return []


@dataclass(frozen=True)
class SignRequest:
    """Voter to organizer: please sign this blinded ballot."""

    blinded: int

    kind = "sign_request"

    def fields(self) -> list[str]:
        return [int_to_hex(self.blinded)]


@dataclass(frozen=True)
class SignResponse:
    """Organizer to voter: signature (or the refusal sentinel 0).

    Echoes the blinded value so the response transaction alone ties the
    signature to the request it answers.
    """

    blinded: int
    signed_blinded: int

    kind = "sign_response"

    def fields(self) -> list[str]:
        return [int_to_hex(self.blinded), int_to_hex(self.signed_blinded)]


Payload = Deploy | Check | Cast | Publish | Tally | SignRequest | SignResponse

_KINDS = {cls.kind: cls for cls in (Deploy, Check, Cast, Publish, Tally, SignRequest, SignResponse)}


def encode_payload(payload: Payload) -> list[str]:
    return [payload.kind, *payload.fields()]


def decode_payload(kind: str, fields: list[str]) -> Payload:
    try:
        return _decode(kind, fields)
    except ParseError:
        raise
    except Exception as exc:
        raise ParseError(f"bad {kind} payload fields {fields!r}: {exc}") from exc


def _decode(kind: str, fields: list[str]) -> Payload:
    if kind not in _KINDS:
        raise ParseError(f"unknown payload kind {kind!r}")
    if kind == "deploy":
        if len(fields) not in (6, 8):
            raise ParseError(f"deploy expects 6 or 8 fields, got {len(fields)}")
        sealed = fields[5] == "1"
        if sealed != (len(fields) == 8):
            raise ParseError("deploy sealing fields do not match the sealed flag")
        return Deploy(
            n=hex_to_int(fields[0]),
            e=hex_to_int(fields[1]),
            st=hex_to_int(fields[2]),
            ct=hex_to_int(fields[3]),
            et=hex_to_int(fields[4]),
            sealed=sealed,
            sealing_n=hex_to_int(fields[6]) if sealed else None,
            sealing_e=hex_to_int(fields[7]) if sealed else None,
        )
    if kind == "check":
        a, b = fields
        return Check(hex_to_int(a), hex_to_int(b))
    if kind == "cast":
        sig, ballot, uuid = fields
        return Cast(hex_to_int(sig), field_to_bytes(ballot), bytes.fromhex(uuid))
    if kind == "publish":
        n, d = fields
        return Publish(hex_to_int(n), hex_to_int(d))
    if kind == "tally":
        if fields:
            raise ParseError("tally takes no fields")
        return Tally()
    if kind == "sign_request":
        (blinded,) = fields
        return SignRequest(hex_to_int(blinded))
    (blinded, signed_blinded) = fields
    return SignResponse(hex_to_int(blinded), hex_to_int(signed_blinded))
