"""Scenario runner.

Builds an election from a config, drives organizer and voters through the
four stages on a fresh ledger, and grades the run against the protocol's
security-property table. Everything downstream of the config seed is
deterministic, so transcripts for equal (config, seed) are byte-identical.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import messages
from .actors import (
    Organizer,
    VoterState,
    prove_receipt,
    verify_receipt,
    voter_cast,
    voter_obtain_signature,
    voter_prepare,
)
from .blindsig import (
    TOY_KEYPAIR,
    ballot_digest,
    fdh,
    int_to_hex,
    keygen,
    keypair_from_primes,
)
from .contract import unseal_ballot
from .errors import (
    CheckFailed,
    ConfigInvalid,
    ParseError,
    ReplayDivergence,
    ResultSealed,
    SignRefused,
)
from .ledger import Account, Ledger, create_account, export_log, import_log, replay
from .rng import as_rng, spawn

VOTER_KINDS = ("honest", "careless", "unlisted")

#: Second enumeration-scale keypair so sealed toy elections do not reuse
#: the signing modulus.
TOY_SEALING_KEYPAIR = keypair_from_primes(67, 71, 17)

#: Expected verdict per security-property row for a well-behaved run.
EXPECTED_VERDICTS = {
    "privacy": "holds",
    "receipt-freeness": "attack-found",
    "robustness": "holds",
    "verifiability": "holds",
    "democracy-eligibility": "holds",
    "democracy-pmv": "holds",
    "fairness": "holds",
    "correctness": "holds",
}


# --- configuration ---------------------------------------------------------------

@dataclass
class VoterSpec:
    name: str
    ballot: str
    chances: int = 1
    kind: str = "honest"
    votes: int | None = None  # attempted votes; defaults to chances

    @property
    def attempts(self) -> int:
        return self.chances if self.votes is None else self.votes


@dataclass
class ScenarioConfig:
    st: int
    ct: int
    et: int
    voters: list[VoterSpec]
    sealed: bool = False
    key_bits: int | None = None  # None = enumeration-scale toy keys
    seed: int = 0

    def validate(self) -> None:
        problems = []
        for name in ("st", "ct", "et", "seed"):
            if not isinstance(getattr(self, name), int):
                problems.append(f"{name}: must be an integer")
        if not problems and not 0 <= self.st < self.ct < self.et:
            problems.append(
                f"windows: need 0 <= st < ct < et, got {self.st}/{self.ct}/{self.et}"
            )
        if not self.voters:
            problems.append("voters: at least one required")
        names = set()
        for i, v in enumerate(self.voters):
            where = f"voters[{i}]"
            if not v.name:
                problems.append(f"{where}.name: empty")
            if v.name in names:
                problems.append(f"{where}.name: duplicate {v.name!r}")
            names.add(v.name)
            if not v.ballot:
                problems.append(f"{where}.ballot: empty")
            if not isinstance(v.chances, int) or v.chances < 1:
                problems.append(f"{where}.chances: must be an integer >= 1")
            if v.votes is not None and (not isinstance(v.votes, int) or v.votes < 0):
                problems.append(f"{where}.votes: must be an integer >= 0")
            if v.kind not in VOTER_KINDS:
                problems.append(f"{where}.kind: {v.kind!r} not in {VOTER_KINDS}")
        if self.key_bits is not None and (
            not isinstance(self.key_bits, int) or self.key_bits < 16
        ):
            problems.append("key_bits: must be null or an integer >= 16")
        if problems:
            raise ConfigInvalid("; ".join(problems))

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if not isinstance(doc, dict):
            raise ConfigInvalid("config document must be an object")
        known = {"windows", "voters", "sealed", "key_bits", "seed"}
        unknown = set(doc) - known
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        windows = doc.get("windows")
        if not isinstance(windows, dict) or set(windows) != {"st", "ct", "et"}:
            raise ConfigInvalid("windows: object with st, ct, et required")
        voters = []
        for i, entry in enumerate(doc.get("voters") or []):
            if not isinstance(entry, dict):
                raise ConfigInvalid(f"voters[{i}]: must be an object")
            extra = set(entry) - {"name", "ballot", "chances", "kind", "votes"}
            if extra:
                raise ConfigInvalid(f"voters[{i}]: unknown keys {sorted(extra)}")
            voters.append(
                VoterSpec(
                    name=entry.get("name", ""),
                    ballot=entry.get("ballot", ""),
                    chances=entry.get("chances", 1),
                    kind=entry.get("kind", "honest"),
                    votes=entry.get("votes"),
                )
            )
        config = cls(
            st=windows["st"],
            ct=windows["ct"],
            et=windows["et"],
            voters=voters,
            sealed=bool(doc.get("sealed", False)),
            key_bits=doc.get("key_bits"),
            seed=doc.get("seed", 0),
        )
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {
            "windows": {"st": self.st, "ct": self.ct, "et": self.et},
            "seed": self.seed,
            "sealed": self.sealed,
            "key_bits": self.key_bits,
            "voters": [
                {
                    "name": v.name,
                    "ballot": v.ballot,
                    "chances": v.chances,
                    "kind": v.kind,
                    "votes": v.votes,
                }
                for v in self.voters
            ],
        }

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ScenarioConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigInvalid(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


# --- run bookkeeping ----------------------------------------------------------------

@dataclass
class VoterRun:
    spec: VoterSpec
    account: Account
    states: list[VoterState] = field(default_factory=list)
    refusals: int = 0
    check_failures: int = 0
    cast_results: list[bool] = field(default_factory=list)
    junk_results: list[bool] = field(default_factory=list)
    accepted_payloads: list[bytes] = field(default_factory=list)
    accepted_plains: list[bytes] = field(default_factory=list)

    @property
    def granted(self) -> int:
        return sum(1 for s in self.states if s.signed is not None)

    @property
    def accepted(self) -> int:
        return sum(self.cast_results)

    @property
    def listed(self) -> bool:
        return self.spec.kind != "unlisted"


@dataclass(frozen=True)
class AssertionRow:
    prop: str
    expected: str
    observed: str
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.expected == self.observed


@dataclass(frozen=True)
class AttackOutcome:
    name: str
    property_exercised: str
    succeeded: bool
    expected_success: bool
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.succeeded == self.expected_success


@dataclass
class RunReport:
    seed: int
    tally_hex: dict[str, int]
    assertions: list[AssertionRow]
    voters: list[dict]
    tx_count: int
    transcript_text: str
    transcript_path: str | None = None
    report_path: str | None = None
    attack: AttackOutcome | None = None

    def all_ok(self) -> bool:
        rows = all(row.ok for row in self.assertions)
        return rows and (self.attack is None or self.attack.ok)

    def to_dict(self) -> dict:
        doc = {
            "seed": self.seed,
            "tally": self.tally_hex,
            "tx_count": self.tx_count,
            "assertions": [
                {
                    "property": row.prop,
                    "expected": row.expected,
                    "observed": row.observed,
                    "ok": row.ok,
                    "detail": row.detail,
                }
                for row in self.assertions
            ],
            "voters": self.voters,
            "all_ok": self.all_ok(),
        }
        if self.attack is not None:
            doc["attack"] = {
                "name": self.attack.name,
                "property": self.attack.property_exercised,
                "succeeded": self.attack.succeeded,
                "expected_success": self.attack.expected_success,
                "ok": self.attack.ok,
                "detail": self.attack.detail,
            }
        return doc

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        transcript = out / "transcript.log"
        report = out / "report.json"
        transcript.write_text(self.transcript_text)
        doc = self.to_dict()
        doc["transcript"] = transcript.name
        report.write_text(json.dumps(doc, indent=2) + "\n")
        self.transcript_path = str(transcript)
        self.report_path = str(report)


# --- election harness ------------------------------------------------------------------

class Election:
    """One election over a fresh ledger, driven stage by stage.

    The attack harness reuses the stages and injects extra traffic in
    between; plain scenario runs call :meth:`run`.
    """

    def __init__(self, config: ScenarioConfig):
        config.validate()
        self.config = config
        self.rng = as_rng(config.seed)
        if config.key_bits is None:
            self.key = TOY_KEYPAIR
        else:
            self.key = keygen(config.key_bits, spawn(self.rng))
        self.sealing_key = None
        if config.sealed:
            if config.key_bits is None:
                self.sealing_key = TOY_SEALING_KEYPAIR
            else:
                self.sealing_key = keygen(config.key_bits, spawn(self.rng))
        self.ledger = Ledger()
        self.organizer = Organizer(
            key=self.key, account=create_account(self.rng), sealing_key=self.sealing_key
        )
        self.voters = [VoterRun(spec, create_account(self.rng)) for spec in config.voters]
        self.contract_address: bytes | None = None
        self.contract = None
        # populated by count_stage
        self.onchain_tally: Counter | None = None
        self.offchain_tally: Counter | None = None
        self.sealed_peek_raised: bool | None = None
        self.sealed_leaks: list[str] = []
        self.published = False
        # adversarial casts injected outside the voter workflow
        self.adversary_cast_results: list[bool] = []

    # -- stages -------------------------------------------------------------

    def setup_stage(self) -> None:
        listed = [(v.account.address, v.spec.chances) for v in self.voters if v.listed]
        self.contract_address = self.organizer.setup(
            self.ledger,
            listed,
            self.config.st,
            self.config.ct,
            self.config.et,
            sealed=self.config.sealed,
        )
        self.contract = self.ledger.contract(self.contract_address)

    def sign_stage(self) -> None:
        self.ledger.advance_clock(self.config.st)
        sealing_pk = self.sealing_key.public if self.sealing_key else None
        for v in self.voters:
            for _ in range(v.spec.attempts):
                state = voter_prepare(
                    v.spec.ballot.encode(),
                    self.rng,
                    self.key.public,
                    v.account,
                    sealing_pk=sealing_pk,
                )
                v.states.append(state)
                try:
                    voter_obtain_signature(
                        state, self.ledger, self.contract_address, self.organizer
                    )
                except SignRefused:
                    v.refusals += 1
                except CheckFailed:
                    v.check_failures += 1

    def vote_stage(self) -> None:
        self.ledger.advance_clock(self.config.ct)
        for v in self.voters:
            for state in v.states:
                if state.signed is None:
                    if v.spec.kind == "unlisted":
                        v.junk_results.append(self._junk_cast(state))
                    continue
                ok = voter_cast(
                    state,
                    self.ledger,
                    self.contract_address,
                    self.rng,
                    anonymous=(v.spec.kind != "careless"),
                )
                v.cast_results.append(ok)
                if ok:
                    v.accepted_payloads.append(state.ballot)
                    v.accepted_plains.append(state.plain_ballot)

    def _junk_cast(self, state: VoterState) -> bool:
        """Unsigned adversary casts with a guessed signature value."""
        fake_signed = self.rng.randrange(1, self.key.n)
        receipt = self.ledger.submit(
            create_account(self.rng),
            self.contract_address,
            messages.Cast(signed=fake_signed, ballot=state.ballot, uuid=state.uuid),
        )
        result = bool(receipt.result)
        self.adversary_cast_results.append(result)
        return result

    def count_stage(self, publish: bool = True) -> None:
        self.ledger.advance_clock(self.config.et)
        if self.config.sealed:
            # the pre-publication peek every sealed run gets probed with
            try:
                self.contract.tally(self.ledger.clock)
                self.sealed_peek_raised = False
            except ResultSealed:
                self.sealed_peek_raised = True
            self.sealed_leaks = self._scan_plaintext(self.ledger.export())
            if publish:
                self.organizer.publish_result(self.ledger)
                self.published = True
        if not self.config.sealed or self.published:
            observer = create_account(self.rng)
            receipt = self.ledger.submit(
                observer, self.contract_address, messages.Tally()
            )
            self.onchain_tally = receipt.result
            _, self.offchain_tally = recount(replay(self.ledger.log))

    def _scan_plaintext(self, transcript: str) -> list[str]:
        """Plaintext ballot bytes that leak into a sealed transcript."""
        leaks = []
        payload_blobs = [
            tx.payload.ballot
            for tx in self.ledger.log
            if isinstance(tx.payload, messages.Cast)
        ]
        for v in self.voters:
            plain = v.spec.ballot.encode()
            if len(plain) >= 4 and plain.hex() in transcript:
                leaks.append(f"{v.spec.name}: ballot hex visible in transcript")
            if any(plain in blob for blob in payload_blobs):
                leaks.append(f"{v.spec.name}: ballot bytes inside a cast payload")
        return leaks

    def run(self) -> None:
        self.setup_stage()
        self.sign_stage()
        self.vote_stage()
        self.count_stage()

    # -- reporting -----------------------------------------------------------

    def final_tally(self) -> Counter | None:
        """Plain-view tally: decrypted in sealed mode once published."""
        return self.onchain_tally

    def build_report(self, attack: AttackOutcome | None = None) -> RunReport:
        tally = self.final_tally() or Counter()
        tally_hex = {
            messages.bytes_to_field(ballot): count
            for ballot, count in sorted(
                tally.items(), key=lambda kv: messages.bytes_to_field(kv[0])
            )
        }
        transcript = self.ledger.export()
        return RunReport(
            seed=self.config.seed,
            tally_hex=tally_hex,
            assertions=evaluate_assertions(self),
            voters=[
                {
                    "name": v.spec.name,
                    "kind": v.spec.kind,
                    "listed": v.listed,
                    "attempts": v.spec.attempts,
                    "granted": v.granted,
                    "refusals": v.refusals,
                    "check_failures": v.check_failures,
                    "accepted_casts": v.accepted,
                    "rejected_casts": len(v.cast_results) - v.accepted
                    + len(v.junk_results) - sum(v.junk_results),
                }
                for v in self.voters
            ],
            tx_count=len(self.ledger.log),
            transcript_text=transcript,
            attack=attack,
        )


# --- the security-property battery -------------------------------------------------------

def evaluate_assertions(election: Election) -> list[AssertionRow]:
    rows = [
        _privacy_row(election),
        _receipt_row(election),
        _robustness_row(election),
        _verifiability_row(election),
        _eligibility_row(election),
        _pmv_row(election),
    ]
    if election.config.sealed:
        rows.append(_fairness_row(election))
    rows.append(_correctness_row(election))
    return [row for row in rows if row is not None]


def _row(prop: str, holds: bool, detail: str = "") -> AssertionRow:
    observed = EXPECTED_VERDICTS[prop] if holds else _flip(EXPECTED_VERDICTS[prop])
    return AssertionRow(prop, EXPECTED_VERDICTS[prop], observed, detail)


def _flip(verdict: str) -> str:
    return "violated" if verdict == "holds" else "attack-not-found"


def _privacy_row(election: Election) -> AssertionRow:
    eligible = {v.account.address for v in election.voters}
    eligible.add(election.organizer.address)
    problems = []
    for tx in election.ledger.log:
        if isinstance(tx.payload, messages.Cast) and tx.sender in eligible:
            problems.append(f"cast at index {tx.index} linkable to a known address")
    # exact-match scan of the sign-stage transcript for voter-local values;
    # at the toy modulus 3-hex-char values collide by chance, so blinding
    # factors only count as leaks at real key sizes
    secret_hex = []
    for v in election.voters:
        for state in v.states:
            secret_hex.append(state.uuid.hex())
            if election.key.n.bit_length() >= 64:
                secret_hex.append(int_to_hex(state.r))
    for tx in election.ledger.log:
        if isinstance(tx.payload, (messages.SignRequest, messages.SignResponse, messages.Check)):
            fields = tx.payload.fields()
            if any(s in fields for s in secret_hex):
                problems.append(f"voter-local value surfaced at index {tx.index}")
    if election.key.n == TOY_KEYPAIR.n and not problems:
        if not _toy_unlinkability(election):
            problems.append("blinding enumeration found an unbalanced transcript")
    return _row("privacy", not problems, "; ".join(problems))


def _toy_unlinkability(election: Election) -> bool:
    """Enumeration form of blindness at the toy modulus.

    For an observed blinded value B and any candidate digest with a unit
    hash, exactly one unit r explains B, so the sign-stage transcript
    carries no information about the digest.
    """
    n, e = election.key.n, election.key.e
    observed = [
        tx.payload.blinded
        for tx in election.ledger.log
        if isinstance(tx.payload, messages.SignRequest)
    ]
    if not observed:
        return True
    blinded = observed[0]
    candidates = []
    for v in election.voters:
        for state in v.states:
            candidates.append(state.ballot)
            if len(candidates) >= 3:
                break
        if len(candidates) >= 3:
            break
    units = [r for r in range(1, n) if math.gcd(r, n) == 1]
    for i, payload in enumerate(candidates):
        digest = ballot_digest(payload, i.to_bytes(16, "big"))
        m = fdh(digest, n)
        if math.gcd(m, n) != 1:
            continue
        target = blinded * pow(m, -1, n) % n
        matches = sum(1 for r in units if pow(r, e, n) == target)
        if matches != 1:
            return False
    return True


def _receipt_row(election: Election) -> AssertionRow | None:
    receipts = 0
    verified = 0
    for v in election.voters:
        if v.spec.kind != "honest":
            continue
        for state in v.states:
            if state.sign_tx_index is None:
                continue
            if election.contract.ballot_box.get(state.uuid) != state.ballot:
                continue  # cast never landed; nothing to prove
            receipts += 1
            if verify_receipt(
                prove_receipt(state), election.ledger, election.contract
            ):
                verified += 1
    if receipts == 0:
        return None  # no completed honest voter: row not applicable
    return _row(
        "receipt-freeness",
        verified == receipts,
        f"{verified}/{receipts} receipts verified by a third party",
    )


def _robustness_row(election: Election) -> AssertionRow:
    problems = []
    for v in election.voters:
        if not v.listed and v.granted > 0:
            problems.append(f"{v.spec.name}: unlisted but granted a signature")
        if v.granted > v.spec.chances:
            problems.append(f"{v.spec.name}: granted beyond budget")
        # every attempt ends granted, refused, or check-failed; anything
        # else is a silent failure
        if v.refusals != v.spec.attempts - v.granted - v.check_failures:
            problems.append(f"{v.spec.name}: a refused request went unnoticed")
    if any(election.adversary_cast_results):
        problems.append("an unsigned adversarial cast was accepted")
    return _row("robustness", not problems, "; ".join(problems))


def _verifiability_row(election: Election) -> AssertionRow:
    text = election.ledger.export()
    try:
        txs = import_log(text)
        if export_log(txs) != text:
            return _row("verifiability", False, "transcript round-trip not byte-exact")
        replayed = replay(txs, expected_results=election.ledger.results)
    except (ParseError, ReplayDivergence) as exc:
        return _row("verifiability", False, f"replay failed: {exc}")
    if replayed.contracts != election.ledger.contracts:
        return _row("verifiability", False, "replayed contract state diverged")
    if election.onchain_tally is not None:
        if election.offchain_tally != election.onchain_tally:
            return _row("verifiability", False, "off-chain recount disagrees with contract")
    return _row("verifiability", True)


def _eligibility_row(election: Election) -> AssertionRow:
    owner_by_uuid = {}
    for v in election.voters:
        for state in v.states:
            owner_by_uuid[state.uuid] = state
    problems = []
    for uuid in election.contract.ballot_box:
        state = owner_by_uuid.get(uuid)
        if state is None:
            problems.append(f"box entry {uuid.hex()} traces to no voter")
        elif state.signed_blinded in (None, 0):
            problems.append(f"box entry {uuid.hex()} lacks an organizer signature")
    for v in election.voters:
        if not v.listed and (v.granted > 0 or v.accepted > 0):
            problems.append(f"{v.spec.name}: unlisted adversary got through")
    if any(election.adversary_cast_results):
        problems.append("forged cast accepted")
    return _row("democracy-eligibility", not problems, "; ".join(problems))


def _pmv_row(election: Election) -> AssertionRow:
    budget = election.organizer.permissions.initial_total
    box = len(election.contract.ballot_box)
    problems = []
    if box > budget:
        problems.append(f"ballot box {box} exceeds total chances {budget}")
    for v in election.voters:
        if v.accepted > v.spec.chances:
            problems.append(f"{v.spec.name}: accepted casts exceed chances")
    return _row("democracy-pmv", not problems, "; ".join(problems))


def _fairness_row(election: Election) -> AssertionRow:
    problems = []
    if election.sealed_peek_raised is False:
        problems.append("tally was readable before key publication")
    problems += election.sealed_leaks
    return _row("fairness", not problems, "; ".join(problems))


def _correctness_row(election: Election) -> AssertionRow:
    accepted = Counter()
    for v in election.voters:
        accepted.update(v.accepted_plains)
    tally = election.final_tally()
    if tally is None:
        return _row("correctness", False, "tally unavailable")
    return _row(
        "correctness",
        tally == accepted,
        f"tally {sorted(tally.items())} vs casts {sorted(accepted.items())}"
        if tally != accepted
        else "",
    )


# --- transcript utilities ------------------------------------------------------------------

def recount(ledger: Ledger) -> tuple[bytes, Counter]:
    """Off-chain recount over a (replayed) ledger's single election.

    Ignores phase windows: anyone holding the transcript counts the box.
    Raises ResultSealed when the election is sealed and the key was never
    published on-ledger.
    """
    contracts = ledger.contracts
    if len(contracts) != 1:
        raise ParseError(f"expected exactly one contract, found {len(contracts)}")
    (address, contract), = contracts.items()
    if not contract.params.sealed:
        return address, Counter(contract.ballot_box.values())
    if contract.published_sealing_d is None:
        raise ResultSealed("sealing key not published in this transcript")
    spk = contract.params.sealing_pk
    return address, Counter(
        unseal_ballot(entry, spk.n, contract.published_sealing_d)
        for entry in contract.ballot_box.values()
    )


@dataclass(frozen=True)
class TranscriptCheck:
    ok: bool
    problem: str | None = None
    index: int | None = None
    tally_hex: dict[str, int] | None = None


def verify_transcript(
    transcript_path: str | Path, report_path: str | Path | None = None
) -> TranscriptCheck:
    """Parse, replay and recount a transcript; compare against its report.

    Any structural break (bad line, index gap, failing execution) and any
    tally or length mismatch against the report counts as divergence.
    """
    text = Path(transcript_path).read_text()
    try:
        txs = import_log(text)
        if export_log(txs) != text:
            return TranscriptCheck(False, "transcript is not in canonical form")
        replayed = replay(txs)
    except ParseError as exc:
        return TranscriptCheck(False, f"parse: {exc}")
    except ReplayDivergence as exc:
        return TranscriptCheck(False, str(exc), index=exc.index)
    tally_hex = None
    try:
        _, tally = recount(replayed)
        tally_hex = {
            messages.bytes_to_field(b): c
            for b, c in sorted(tally.items(), key=lambda kv: messages.bytes_to_field(kv[0]))
        }
    except ResultSealed:
        tally = None
    except (ParseError, ValueError) as exc:
        return TranscriptCheck(False, f"recount: {exc}")
    if report_path is not None:
        doc = json.loads(Path(report_path).read_text())
        if doc.get("tx_count") != len(txs):
            return TranscriptCheck(
                False,
                f"transcript has {len(txs)} transactions, report says {doc.get('tx_count')}",
                tally_hex=tally_hex,
            )
        if tally_hex is not None and doc.get("tally") != tally_hex:
            return TranscriptCheck(
                False, "recomputed tally disagrees with the report", tally_hex=tally_hex
            )
    return TranscriptCheck(True, tally_hex=tally_hex)


# --- entry point ------------------------------------------------------------------------------

def run_scenario(config: ScenarioConfig, out_dir: str | Path | None = None) -> RunReport:
    """Run all four stages and grade the result; optionally write artifacts."""
    election = Election(config)
    election.run()
    report = election.build_report()
    if out_dir is not None:
        report.write(out_dir)
    return report
