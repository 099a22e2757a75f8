"""
Experiment runner

One entry point per subcommand. The runner resolves unset parameters from the
model, validates them before any simulation, runs the analysis modules and
writes the report files. Outputs depend on the resolved settings only.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from analysis import fields as field_analysis
from analysis import grr, holder, moments, tails
from config import config
from errors import DomainError
from models.base_model import BaseProcessModel, ModelSpec, SampleField, SamplePath
from models.model_manager import get_model_manager
from reports import MOMENT_COLUMNS, TAIL_COLUMNS, ReportWriter, read_sample
from run_config import RunConfig

logger = logging.getLogger(__name__)

METRIC_BOX_FRACTIONS = (0.25, 0.5, 0.75, 1.0)


@dataclass
class ExperimentOutcome:
    """Verdict, summary record and written files of one run."""
    subcommand: str
    passed: bool
    summary: Dict[str, Any] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)


def build_spec(run: RunConfig) -> ModelSpec:
    """ModelSpec described by the model flags of a run."""
    h = run.hurst
    if run.model == "fbm":
        return ModelSpec.fbm(h[0], seed=run.seed)
    if run.model == "wick":
        return ModelSpec.wick_chaos(run.order, h[0], seed=run.seed)
    if run.model == "sheet":
        return ModelSpec.fbm_sheet(h[0], h[1], seed=run.seed)
    if run.model == "product":
        return ModelSpec.product(ModelSpec.fbm(h[0]), ModelSpec.fbm(h[1]), seed=run.seed)
    if run.model == "combination":
        return ModelSpec.combination(run.weights, [ModelSpec.fbm(x) for x in h], seed=run.seed)
    return ModelSpec(kind="deterministic", shape=run.shape, seed=run.seed)


class ExperimentRunner:
    """
    Runs one subcommand for a RunConfig.

    Unset beta, beta0, iota, C0 and alpha are taken from the model: (C0, iota)
    from its hypercontractivity witness, alpha from its Hoelder exponents, beta
    at half the finite-moment window and beta0 at half of beta0_max.
    """

    def __init__(self, run: RunConfig):
        self.logger = logging.getLogger(f"{__name__}.{self.__class__.__name__}")
        self.manager = get_model_manager()
        self.spec = build_spec(run)
        self.model: BaseProcessModel = self.manager.create_model(self.spec)
        self.input_sample = read_sample(run.input) if run.input else None
        self.run = self._resolve(run)

    def _resolve(self, run: RunConfig) -> RunConfig:
        dims = self.model.dims
        witness_c0, witness_iota = self.model.hyper_witness()
        c0 = run.c0 if run.c0 is not None else witness_c0
        iota = run.iota if run.iota is not None else witness_iota
        alpha = list(run.alpha) if run.alpha else list(self.model.holder_exponents())
        if self.input_sample is not None:
            dims = 1 if isinstance(self.input_sample, SamplePath) else self.input_sample.dims
            if len(alpha) != dims:
                alpha = alpha[:1] * dims
        if len(alpha) != dims:
            raise DomainError(f"{len(alpha)} alpha values for a {dims}-parameter model")

        window = grr.beta_window(c0, iota)
        beta = run.beta if run.beta is not None else 0.5 * window
        if beta >= window:
            raise DomainError(f"beta={beta} is outside the finite-moment window (0, {window:.6g}) "
                              f"for C0={c0}, iota={iota}")
        limit = tails.beta0_max(c0, iota, dims)
        beta0 = run.beta0 if run.beta0 is not None else 0.5 * limit
        if run.subcommand == "tail" and beta0 >= limit:
            raise DomainError(f"beta0={beta0} must be below beta0_max={limit:.6g}")
        grr.check_parameters(beta, iota, alpha)

        grid = list(run.grid) if run.grid else run.default_grid()
        if self.model.dims > 1 and len(grid) == 1:
            grid = grid * self.model.dims
        resolved = run.model_copy(update={
            "c0": c0, "iota": iota, "alpha": alpha, "beta": beta, "beta0": beta0, "grid": grid,
            "paths": run.paths if run.paths is not None else run.default_paths(),
        })
        self.logger.info(f"Resolved {run.subcommand} run for {self.spec.describe()}: "
                         f"C0={c0:g} iota={iota:g} beta={beta:.6g} alpha={alpha}")
        return resolved

    @property
    def grid(self) -> Union[int, Tuple[int, ...]]:
        return self.run.grid[0] if self.model.dims == 1 else tuple(self.run.grid)

    def execute(self) -> ExperimentOutcome:
        """Write the manifest, then run the subcommand."""
        handlers: Dict[str, Callable[[ReportWriter], ExperimentOutcome]] = {
            "simulate": self.simulate,
            "moments": self.moments,
            "grr": self.grr,
            "field": self.field,
            "tail": self.tail,
            "holder": self.holder,
        }
        writer = ReportWriter(self.run.out)
        writer.write_manifest(self.run.manifest())
        outcome = handlers[self.run.subcommand](writer)
        outcome.files = list(writer.written)
        return outcome

    def _samples(self, n: Optional[int] = None) -> List[Union[SamplePath, SampleField]]:
        if self.input_sample is not None:
            return [self.input_sample]
        return self.manager.sample_batch(self.spec, self.grid, n or self.run.paths, workers=self.run.workers)

    # Subcommands

    def simulate(self, writer: ReportWriter) -> ExperimentOutcome:
        samples = self._samples()
        for index, sample in enumerate(samples):
            if isinstance(sample, SamplePath):
                writer.write_path(f"path_{index:04d}.csv", sample)
            else:
                writer.write_field(f"field_{index:04d}.csv", sample)
        c0, iota = self.model.hyper_witness()
        summary = {
            "model": self.spec.describe(),
            "n_paths": len(samples),
            "grid": self.run.grid,
            "witness_C0": c0,
            "witness_iota": iota,
            "holder_exponents": list(self.model.holder_exponents()),
        }
        writer.write_record("simulate.txt", summary)
        return ExperimentOutcome("simulate", True, summary)

    def moments(self, writer: ReportWriter) -> ExperimentOutcome:
        if self.model.dims != 1 and self.input_sample is None:
            raise DomainError("moments runs on one-parameter models")
        paths = self._samples()
        if not isinstance(paths[0], SamplePath):
            raise DomainError("moments needs a path, not a field")
        params = moments.HyperParams(C0=self.run.c0, iota=self.run.iota)
        rows = moments.increment_moment_table(paths, self.run.p, params=params)
        estimate = moments.fit_hyper_params({row.p: row.ratio for row in rows})

        oracle = self.spec.kind == "fbm" and self.input_sample is None
        table = []
        for row in rows:
            record = {"p": row.p, "ratio": row.ratio, "max_ratio": row.max_ratio,
                      "bound": row.bound, "pass": row.passed}
            if oracle:
                record["oracle"] = moments.gaussian_abs_moment(row.p)
            table.append(record)
        columns = MOMENT_COLUMNS + (["oracle"] if oracle else [])
        writer.write_rows("moments.csv", table, columns=columns)

        passed = all(row.passed for row in rows)
        summary = {"model": self.spec.describe(), "n_paths": len(paths), **estimate.to_dict(),
                   "bound_C0": params.C0, "bound_iota": params.iota, "passed": passed}
        writer.write_record("moments_fit.txt", summary)
        return ExperimentOutcome("moments", passed, summary)

    def grr(self, writer: ReportWriter) -> ExperimentOutcome:
        paths = self._samples()
        if not isinstance(paths[0], SamplePath):
            raise DomainError("grr runs on paths; use the field subcommand for fields")
        grr_config = grr.GrrConfig(beta=self.run.beta, iota=self.run.iota, alpha=self.run.alpha[0],
                                   C0=self.run.c0)
        rows = []
        first_result = None
        for index, path in enumerate(paths):
            result = grr.analyze_path(path, grr_config)
            report = grr.verify_modulus(path, result, grr_config.alpha, grr_config.iota)
            first_result = first_result or result
            rows.append({"path": index, **result.to_record(), **report.to_record()})
        writer.write_rows("grr.csv", rows)
        writer.write_rows("grr_modulus.csv", [{"delta": d, "bound": b} for d, b in first_result.modulus_samples])

        violations = int(sum(row["violations"] for row in rows))
        summary = {"model": self.spec.describe(), "n_paths": len(paths),
                   **{key: first_result.to_record()[key] for key in ("beta", "iota", "alpha", "C_d")},
                   "B_mean": float(np.mean([row["B"] for row in rows])),
                   "B_max": float(np.max([row["B"] for row in rows])),
                   "violations": violations, "passed": violations == 0}
        if paths[0].n_points >= grr.LIMSUP_MIN_POINTS:
            summary["limsup_ratio_max"] = max(grr.limsup_ratio(path, grr_config.alpha, grr_config.iota)
                                              for path in paths)
        if len(paths) == 1:
            summary["B"] = first_result.B
            summary["C_omega"] = first_result.C_omega
        writer.write_record("grr.txt", summary)
        return ExperimentOutcome("grr", violations == 0, summary)

    def field(self, writer: ReportWriter) -> ExperimentOutcome:
        samples = [s if isinstance(s, SampleField) else SampleField.from_path(s) for s in self._samples()]
        alphas = tuple(self.run.alpha)
        field_config = field_analysis.FieldGrrConfig(beta=self.run.beta, iota=self.run.iota,
                                                     alphas=alphas, C0=self.run.c0)
        rows = []
        for index, sample in enumerate(samples):
            result = field_analysis.analyze_field(sample, field_config)
            report = field_analysis.verify_field_modulus(sample, result, alphas, field_config.iota)
            limsup = field_analysis.field_limsup_ratio(sample, alphas, field_config.iota)
            rows.append({"field": index, **result.to_record(), **report.to_record(), "limsup_ratio": limsup})
        writer.write_rows("field.csv", rows)

        sobolev_rows = []
        for epsilon in self.run.epsilon:
            if epsilon >= min(alphas):
                continue
            result = field_analysis.field_sobolev_bound(samples[0], alphas, epsilon)
            sobolev_rows.append({"epsilon": epsilon, "constant": result.constant, "q": result.q,
                                 **result.report.to_record()})
        if sobolev_rows:
            writer.write_rows("field_sobolev.csv", sobolev_rows)

        _, c_d = field_analysis.field_holder_constants(1.0, field_config.beta, field_config.iota, alphas)
        violations = int(sum(row["violations"] for row in rows))
        summary = {"model": self.spec.describe(), "n_fields": len(samples),
                   "C_d": c_d, "C_tilde": field_analysis.c_tilde(alphas, field_config.iota, c_d),
                   "violations": violations,
                   "sobolev_violations": int(sum(row["violations"] for row in sobolev_rows))}
        if self.input_sample is None and self.model.dims > 1:
            writer.write_rows("field_metric.csv", self._metric_rows(alphas))
        summary["passed"] = violations == 0 and summary["sobolev_violations"] == 0
        writer.write_record("field.txt", summary)
        return ExperimentOutcome("field", summary["passed"], summary)

    def _metric_rows(self, alphas: Tuple[float, ...]) -> List[Dict[str, Any]]:
        """Monte Carlo d_X on square boxes from the origin next to prod side^alpha_j."""
        n_paths = max(self.run.paths, field_analysis.MIN_D_METRIC_PATHS)
        dims = self.model.dims
        samples = self.manager.sample_batch(self.spec, self.grid, n_paths, workers=self.run.workers)
        rows = []
        for fraction in METRIC_BOX_FRACTIONS:
            corner = (fraction,) * dims
            squares = np.array([field_analysis.box_increment(f, (0.0,) * dims, corner) for f in samples]) ** 2
            d_hat = float(np.sqrt(np.mean(squares)))
            reference = float(np.prod([fraction ** a for a in alphas]))
            rows.append({"side": fraction, "d_hat": d_hat, "reference": reference,
                         "se": float(np.std(squares) / (2.0 * max(d_hat, 1e-300) * np.sqrt(n_paths)))})
        return rows

    def tail(self, writer: ReportWriter) -> ExperimentOutcome:
        if self.input_sample is not None:
            raise DomainError("tail needs simulated paths; --input is not supported")
        tail_config = tails.TailConfig(beta=self.run.beta, beta0=self.run.beta0, iota=self.run.iota,
                                       alphas=tuple(self.run.alpha), C0=self.run.c0)
        a, b = self.run.interval
        if self.model.dims == 1:
            result = tails.sup_tail_experiment(self.spec, interval=(a, b), base=self.run.base,
                                               u_grid=self.run.u, n_paths=self.run.paths,
                                               tail_config=tail_config, grid=self.grid, workers=self.run.workers)
        else:
            dims = self.model.dims
            result = tails.field_sup_tail_experiment(self.spec, (a,) * dims, (b,) * dims, (self.run.base,) * dims,
                                                     u_grid=self.run.u, n_paths=self.run.paths,
                                                     tail_config=tail_config, grid=self.grid, workers=self.run.workers)
        writer.write_rows("tail.csv", result.curve.to_rows(), columns=TAIL_COLUMNS)
        sidecar = {"model": self.spec.describe(), "seed": self.spec.seed, "beta": tail_config.beta,
                   "beta0": tail_config.beta0, "iota": tail_config.iota, "alpha": list(tail_config.alphas),
                   **result.to_record()}
        writer.write_json("tail.json", sidecar)
        return ExperimentOutcome("tail", result.curve.passed, sidecar)

    def holder(self, writer: ReportWriter) -> ExperimentOutcome:
        if self.input_sample is not None:
            raise DomainError("holder needs simulated paths; --input is not supported")
        if self.model.dims > 1:
            return self._field_holder(writer)

        report = holder.iff_report(self.spec, alpha=self.run.alpha[0], epsilons=self.run.epsilon,
                                   n_paths=self.run.paths, grid=self.grid, workers=self.run.workers)
        writer.write_rows("holder.csv", report.scaling.to_rows())
        first = self.manager.sample(self.spec, self.grid, seed=self.spec.seed)
        writer.write_rows("holder_oscillation.csv",
                          [vars(row) for row in holder.oscillation_profile(first)])

        valid = [e for e in self.run.epsilon if e < report.alpha]
        if valid:
            tightness = tails.tightness_diagnostic(self.spec, valid[0], alpha=report.alpha,
                                                   n_paths=self.run.paths, grid=min(self.grid, 257),
                                                   workers=self.run.workers)
            writer.write_rows("holder_tightness.csv", [vars(row) for row in tightness.rows])

        summary = {"model": self.spec.describe(), **report.to_record()}
        if report.exp_moment is not None:
            summary.update({f"exp_moment_{k}": v for k, v in report.exp_moment.to_record().items()})
        writer.write_record("holder.txt", summary)
        return ExperimentOutcome("holder", report.passed, summary)

    def _field_holder(self, writer: ReportWriter) -> ExperimentOutcome:
        report = holder.field_variance_scaling(self.spec, n_paths=self.run.paths, grid=self.grid,
                                               workers=self.run.workers)
        rows = []
        for axis, fit in enumerate(report.axis_fits, start=1):
            rows += [{"axis": axis, **row} for row in fit.to_rows()]
        rows += [{"axis": 0, **row} for row in report.diagonal_fit.to_rows()]
        writer.write_rows("holder.csv", rows)

        tolerance = config.holder_alpha_tolerance
        passed = all(hat >= a - tolerance for hat, a in zip(report.alpha_hats, self.run.alpha))
        summary = {"model": self.spec.describe(),
                   **{f"alpha{j}_hat": hat for j, hat in enumerate(report.alpha_hats, start=1)},
                   "alpha_sum_hat": report.diagonal_fit.alpha_hat,
                   "alpha": list(self.run.alpha), "passed": passed}
        writer.write_record("holder.txt", summary)
        return ExperimentOutcome("holder", passed, summary)
