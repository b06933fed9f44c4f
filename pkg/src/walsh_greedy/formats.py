"""JSON and CSV readers and writers for every artifact the library emits.

Writers are byte-stable: keys sorted, two-space indentation, floats with 17
significant digits and a trailing newline, so the same inputs always produce
identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, List, Sequence, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel

from .adic import AdicInterval, CellSet, StepFunction
from .certificates import Certificate, Conclusion
from .chrestenson import Spectrum
from .config import BudgetProfile
from .driver import CorrectionResult, StepRecord
from .errors import InvalidParameterError
from .greedy import CurvePoint
from .lemmas import Lemma1Params, Lemma1Result, Lemma2Result, StepApproximation, WalshPolynomial, lemma1_plan
from .schemas import (
    CellSetModel,
    CertificateFile,
    CoefficientModel,
    ConclusionModel,
    CorrectionArtifacts,
    Lemma1Artifacts,
    Lemma2Artifacts,
    PolynomialModel,
    SpectrumModel,
    StepFunctionModel,
    StepRecordModel,
)

Model = TypeVar("Model", bound=BaseModel)
Result = Union[Lemma1Result, Lemma2Result, CorrectionResult]

CURVE_HEADER = ("m", "error_p", "partial_sum_norm_1")


def format_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _render(value: Any, depth: int) -> str:
    pad, inner = "  " * depth, "  " * (depth + 1)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_render(value[k], depth + 1)}" for k in sorted(value, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{_render(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps_stable(data: Any) -> str:
    return _render(data, 0) + "\n"


def write_model(path: Path, model: BaseModel) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_stable(model.model_dump(mode="python", by_alias=True)), encoding="utf-8")


def read_model(path: Path, model_cls: Type[Model]) -> Model:
    return model_cls.model_validate(json.loads(path.read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# value objects


def parse_interval(text: str, order: int) -> AdicInterval:
    """'m:k' -> Δ_m^{(k)}."""
    try:
        level, index = (int(part) for part in text.split(":"))
    except ValueError as exc:
        raise InvalidParameterError(f"interval must look like 'm:k', got {text!r}") from exc
    return AdicInterval(order, level, index)


def _pair(z: complex) -> tuple:
    return (float(z.real), float(z.imag))


def _coefficients(indices: np.ndarray, values: np.ndarray) -> List[CoefficientModel]:
    return [
        CoefficientModel(n=int(n), re=float(c.real), im=float(c.imag))
        for n, c in zip(indices.tolist(), values.tolist())
    ]


def step_function_to_model(f: StepFunction) -> StepFunctionModel:
    return StepFunctionModel(order=f.order, level=f.level, values=[_pair(z) for z in f.values.tolist()])


def step_function_from_model(model: StepFunctionModel) -> StepFunction:
    values = np.array([complex(re, im) for re, im in model.values], dtype=np.complex128)
    return StepFunction(model.order, model.level, values)


def spectrum_to_model(spectrum: Spectrum) -> SpectrumModel:
    return SpectrumModel(
        order=spectrum.order,
        source_level=spectrum.source_level,
        coefficients=_coefficients(spectrum.indices, spectrum.values),
    )


def spectrum_from_model(model: SpectrumModel) -> Spectrum:
    mapping = {c.n: complex(c.re, c.im) for c in model.coefficients}
    if len(mapping) != len(model.coefficients):
        raise InvalidParameterError("duplicate spectral index")
    return Spectrum.from_mapping(model.order, model.source_level, mapping)


def polynomial_to_model(polynomial: WalshPolynomial) -> PolynomialModel:
    return PolynomialModel(
        order=polynomial.order,
        coefficients=_coefficients(polynomial.indices, polynomial.coefficients),
    )


def polynomial_from_model(model: PolynomialModel) -> WalshPolynomial:
    return WalshPolynomial.from_terms(model.order, ((c.n, complex(c.re, c.im)) for c in model.coefficients))


def cell_set_to_model(cells: CellSet) -> CellSetModel:
    return CellSetModel(order=cells.order, level=cells.level, members=cells.members.tolist())


def cell_set_from_model(model: CellSetModel) -> CellSet:
    return CellSet(model.order, model.level, np.asarray(model.members, dtype=np.int64))


def load_step_function(path: Path) -> StepFunction:
    return step_function_from_model(read_model(path, StepFunctionModel))


def save_step_function(path: Path, f: StepFunction) -> None:
    write_model(path, step_function_to_model(f))


def load_spectrum(path: Path) -> Spectrum:
    return spectrum_from_model(read_model(path, SpectrumModel))


def save_spectrum(path: Path, spectrum: Spectrum) -> None:
    write_model(path, spectrum_to_model(spectrum))


# ---------------------------------------------------------------------------
# certificates


def conclusion_to_model(conclusion: Conclusion) -> ConclusionModel:
    return ConclusionModel(
        name=conclusion.name,
        relation=conclusion.relation,
        claimed_bound=conclusion.claimed_bound,
        achieved_value=conclusion.achieved_value,
        passed=conclusion.passed,
        slack=conclusion.slack,
        asserted=conclusion.asserted,
        note=conclusion.note,
    )


def conclusion_from_model(model: ConclusionModel) -> Conclusion:
    return Conclusion(
        name=model.name,
        relation=model.relation,
        claimed_bound=model.claimed_bound,
        achieved_value=model.achieved_value,
        passed=model.passed,
        slack=model.slack,
        asserted=model.asserted,
        note=model.note,
    )


def _artifacts(result: Result) -> BaseModel:
    if isinstance(result, Lemma1Result):
        params = result.params
        return Lemma1Artifacts(
            gamma=_pair(params.gamma),
            n0=params.n0,
            eps=params.eps,
            interval=str(params.interval),
            polynomial=polynomial_to_model(result.polynomial),
            kept_set=cell_set_to_model(result.kept_set),
        )
    if isinstance(result, Lemma2Result):
        approx = result.step_approx
        return Lemma2Artifacts(
            f=step_function_to_model(result.f),
            g=step_function_to_model(result.g),
            kept_set=cell_set_to_model(result.kept_set),
            polynomial=polynomial_to_model(result.polynomial),
            intervals=[str(i) for i in approx.intervals],
            gammas=[_pair(g) for g in approx.gammas],
            residual=approx.residual,
            budget=approx.budget,
            magnitude_cap_used=approx.magnitude_cap,
            smallness_bound=approx.smallness_bound,
            n0=result.n0,
            eps=result.eps,
            magnitude_cap=result.magnitude_cap,
            profile=result.profile.value,
        )
    return CorrectionArtifacts(
        f=step_function_to_model(result.f),
        g=step_function_to_model(result.g),
        kept_set=cell_set_to_model(result.kept_set),
        series=polynomial_to_model(result.series),
        trace=[StepRecordModel(**vars(record)) for record in result.trace],
        eps=result.eps,
        tol=result.tol,
        q_max=result.q_max,
        n0=result.n0,
        profile=result.profile.value,
        mode=result.mode,
        stop_reason=result.stop_reason,
    )


def certificate_file(result: Result, certificate: Certificate) -> CertificateFile:
    """Certificate plus every raw artifact needed to re-derive it."""
    return CertificateFile(
        kind=certificate.kind,
        passed=certificate.passed,
        conclusions=[conclusion_to_model(c) for c in certificate.conclusions],
        params=dict(certificate.params),
        trace=list(certificate.trace),
        artifacts=_artifacts(result).model_dump(mode="python"),
    )


def save_certificate(path: Path, result: Result, certificate: Certificate | None = None) -> None:
    certificate = certificate or result.certificate
    if certificate is None:
        raise InvalidParameterError("result carries no certificate")
    write_model(path, certificate_file(result, certificate))


def certificate_from_file(model: CertificateFile) -> Certificate:
    return Certificate(
        kind=model.kind,
        conclusions=tuple(conclusion_from_model(c) for c in model.conclusions),
        params=dict(model.params),
        trace=tuple(model.trace),
    )


def result_from_file(model: CertificateFile) -> Result:
    """Rebuild the certified result from the embedded artifacts."""
    claimed = certificate_from_file(model)
    if model.kind == "lemma1":
        art = Lemma1Artifacts.model_validate(model.artifacts)
        order = art.polynomial.order
        params = Lemma1Params(complex(*art.gamma), art.n0, art.eps, parse_interval(art.interval, order))
        return Lemma1Result(
            params=params,
            derived=lemma1_plan(params.gamma, params.n0, params.eps, params.interval),
            polynomial=polynomial_from_model(art.polynomial),
            kept_set=cell_set_from_model(art.kept_set),
            certificate=claimed,
        )
    if model.kind == "lemma2":
        art = Lemma2Artifacts.model_validate(model.artifacts)
        f = step_function_from_model(art.f)
        approx = StepApproximation(
            order=f.order,
            intervals=tuple(parse_interval(text, f.order) for text in art.intervals),
            gammas=tuple(complex(*g) for g in art.gammas),
            residual=art.residual,
            budget=art.budget,
            magnitude_cap=art.magnitude_cap_used,
            smallness_bound=art.smallness_bound,
        )
        return Lemma2Result(
            f=f,
            g=step_function_from_model(art.g),
            kept_set=cell_set_from_model(art.kept_set),
            polynomial=polynomial_from_model(art.polynomial),
            step_approx=approx,
            n0=art.n0,
            eps=art.eps,
            magnitude_cap=art.magnitude_cap,
            profile=BudgetProfile(art.profile),
            certificate=claimed,
        )
    art = CorrectionArtifacts.model_validate(model.artifacts)
    return CorrectionResult(
        f=step_function_from_model(art.f),
        g=step_function_from_model(art.g),
        kept_set=cell_set_from_model(art.kept_set),
        series=polynomial_from_model(art.series),
        trace=tuple(StepRecord(**record.model_dump()) for record in art.trace),
        eps=art.eps,
        tol=art.tol,
        q_max=art.q_max,
        n0=art.n0,
        profile=BudgetProfile(art.profile),
        mode=art.mode,
        stop_reason=art.stop_reason,
        certificate=claimed,
    )


def load_certificate(path: Path) -> tuple[Result, Certificate]:
    model = read_model(path, CertificateFile)
    result = result_from_file(model)
    return result, result.certificate


# ---------------------------------------------------------------------------
# curves


def write_curve_csv(path: Path, curve: Sequence[CurvePoint]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CURVE_HEADER)
        for point in curve:
            writer.writerow([point.m, format(point.error, ".17g"), format(point.partial_sum_norm_1, ".17g")])


def read_curve_csv(path: Path) -> List[CurvePoint]:
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        return [
            CurvePoint(int(row["m"]), float(row["error_p"]), float(row["partial_sum_norm_1"]))
            for row in reader
        ]
