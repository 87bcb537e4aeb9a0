//! Python bindings: `import asmcap`.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use asmcap_core::cam::{self, MatchMode, NoiseMode, ResamplePolicy};
use asmcap_core::correction::{self, HdacParams, TasrParams};
use asmcap_core::eval::{self, parse_strategies, DatasetSpec, EvalPlan, Evaluator};
use asmcap_core::genome::{self, Condition, Sequence};
use asmcap_core::{oracle, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyOSError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for asmcap_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn seq(s: &str) -> PyResult<Sequence> {
    s.parse().py()
}

fn mode(s: &str) -> PyResult<MatchMode> {
    s.parse().py()
}

#[pyclass(name = "ArrayConfig", from_py_object)]
#[derive(Clone)]
struct PyArrayConfig {
    inner: cam::ArrayConfig,
}

#[pymethods]
impl PyArrayConfig {
    #[new]
    #[pyo3(signature = (rows=256, cols=256, vdd=1.2, array_count=512))]
    fn new(rows: usize, cols: usize, vdd: f64, array_count: usize) -> PyResult<Self> {
        let inner = cam::ArrayConfig { rows, cols, vdd, array_count };
        inner.validate().py()?;
        Ok(PyArrayConfig { inner })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols
    }

    #[getter]
    fn vdd(&self) -> f64 {
        self.inner.vdd
    }

    #[getter]
    fn array_count(&self) -> usize {
        self.inner.array_count
    }

    /// Sense-amplifier reference voltage for threshold `t`.
    fn v_ref(&self, t: usize) -> f64 {
        self.inner.v_ref(t)
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!("ArrayConfig(rows={}, cols={}, vdd={}, array_count={})", c.rows, c.cols, c.vdd, c.array_count)
    }
}

#[pyclass(name = "NoiseModel", from_py_object)]
#[derive(Clone)]
struct PyNoiseModel {
    inner: cam::NoiseModel,
}

#[pymethods]
impl PyNoiseModel {
    #[new]
    #[pyo3(signature = (mode="gaussian_formula", sigma_over_mu=0.014, mu_c=2e-15, resample="per_array_instance"))]
    fn new(mode: &str, sigma_over_mu: f64, mu_c: f64, resample: &str) -> PyResult<Self> {
        let inner = cam::NoiseModel {
            mu_c,
            sigma_over_mu,
            mode: mode.parse::<NoiseMode>().py()?,
            resample: resample.parse::<ResamplePolicy>().py()?,
        };
        inner.validate().py()?;
        Ok(PyNoiseModel { inner })
    }

    #[staticmethod]
    fn ideal() -> Self {
        PyNoiseModel { inner: cam::NoiseModel::ideal() }
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    #[getter]
    fn sigma_over_mu(&self) -> f64 {
        self.inner.sigma_over_mu
    }

    #[getter]
    fn mu_c(&self) -> f64 {
        self.inner.mu_c
    }

    fn __repr__(&self) -> String {
        format!(
            "NoiseModel(mode={:?}, sigma_over_mu={}, mu_c={:e}, resample={:?})",
            self.inner.mode.as_str(),
            self.inner.sigma_over_mu,
            self.inner.mu_c,
            self.inner.resample.as_str()
        )
    }
}

#[pyclass(name = "ErrorProfile", from_py_object)]
#[derive(Clone)]
struct PyErrorProfile {
    inner: genome::ErrorProfile,
}

#[pymethods]
impl PyErrorProfile {
    #[new]
    fn new(e_s: f64, e_i: f64, e_d: f64) -> PyResult<Self> {
        Ok(PyErrorProfile { inner: genome::ErrorProfile::new(e_s, e_i, e_d).py()? })
    }

    /// Built-in profile of condition "A" or "B".
    #[staticmethod]
    fn condition(name: &str) -> PyResult<Self> {
        Ok(PyErrorProfile { inner: name.parse::<Condition>().py()?.profile() })
    }

    #[getter]
    fn e_s(&self) -> f64 {
        self.inner.e_s()
    }

    #[getter]
    fn e_i(&self) -> f64 {
        self.inner.e_i()
    }

    #[getter]
    fn e_d(&self) -> f64 {
        self.inner.e_d()
    }

    #[getter]
    fn e_id(&self) -> f64 {
        self.inner.e_id()
    }

    fn __repr__(&self) -> String {
        format!("ErrorProfile(e_s={}, e_i={}, e_d={})", self.inner.e_s(), self.inner.e_i(), self.inner.e_d())
    }
}

#[pyclass(name = "ReadRecord", frozen)]
struct PyReadRecord {
    #[pyo3(get)]
    read: String,
    #[pyo3(get)]
    origin_row: usize,
    #[pyo3(get)]
    true_ed: usize,
    /// Edits as `pos:kind:orig>new` strings.
    #[pyo3(get)]
    ledger: Vec<String>,
}

impl From<&genome::ReadRecord> for PyReadRecord {
    fn from(r: &genome::ReadRecord) -> Self {
        PyReadRecord {
            read: r.read.to_string(),
            origin_row: r.origin_row,
            true_ed: r.true_ed_to_origin,
            ledger: r.edit_ledger.iter().map(ToString::to_string).collect(),
        }
    }
}

#[pymethods]
impl PyReadRecord {
    fn __repr__(&self) -> String {
        format!("ReadRecord(origin_row={}, true_ed={}, edits={})", self.origin_row, self.true_ed, self.ledger.len())
    }
}

/// A segmented reference with a read set drawn from it.
#[pyclass(name = "Dataset")]
struct PyDataset {
    store: genome::GenomeStore,
    reads: genome::ReadSet,
}

#[pymethods]
impl PyDataset {
    #[getter]
    fn reference(&self) -> String {
        self.store.reference().to_string()
    }

    #[getter]
    fn segments(&self) -> Vec<String> {
        self.store.segments().iter().map(|s| s.bases.to_string()).collect()
    }

    #[getter]
    fn reads(&self) -> Vec<PyReadRecord> {
        self.reads.reads.iter().map(PyReadRecord::from).collect()
    }

    #[getter]
    fn condition(&self) -> String {
        self.reads.meta.condition.clone()
    }

    fn __len__(&self) -> usize {
        self.reads.reads.len()
    }

    /// Writes `reference.fa`, `array.img` and `reads.tsv` into `directory`.
    #[pyo3(signature = (directory, config=None))]
    fn write(&self, directory: PathBuf, config: Option<PyArrayConfig>) -> PyResult<()> {
        std::fs::create_dir_all(&directory).map_err(|e| py_err(e.into()))?;
        let mut fa = Vec::new();
        genome::write_fasta(&mut fa, "reference", self.store.reference(), 80).py()?;
        std::fs::write(directory.join("reference.fa"), fa).map_err(|e| py_err(e.into()))?;
        let image = cam::ArrayImage::from_store(&self.store, config.map(|c| c.inner).unwrap_or_default());
        cam::write_array_image(directory.join("array.img"), &image).py()?;
        genome::write_reads_file(directory.join("reads.tsv"), &self.reads).py()
    }

    /// Evaluates strategies on this dataset.
    #[pyo3(signature = (thresholds, strategies="plain_ed_star,hdac,tasr", noise=None, seed=1, config=None))]
    fn evaluate(
        &self,
        thresholds: Vec<usize>,
        strategies: &str,
        noise: Option<PyNoiseModel>,
        seed: u64,
        config: Option<PyArrayConfig>,
    ) -> PyResult<PyReport> {
        let plan = EvalPlan {
            thresholds,
            strategies: parse_strategies(strategies).py()?,
            noise: noise.map(|n| n.inner).unwrap_or_default(),
            hdac: HdacParams::default(),
            tasr: TasrParams::default(),
            seed,
            distractor_sample: None,
        };
        let image = cam::ArrayImage::from_store(&self.store, config.map(|c| c.inner).unwrap_or_default());
        let report = Evaluator::new(&image, &self.reads, &plan).py()?.run().py()?;
        Ok(PyReport { inner: report })
    }
}

#[pyclass(name = "Report")]
struct PyReport {
    inner: eval::EvalReport,
}

#[pymethods]
impl PyReport {
    /// Report in the CSV format written by the CLI.
    fn csv(&self) -> String {
        self.inner.to_csv()
    }

    /// `(strategy, T, tp, fp, fn, tn, f1)` tuples; f1 is None when undefined.
    #[allow(clippy::type_complexity)]
    fn rows(&self) -> Vec<(String, usize, u64, u64, u64, u64, Option<f64>)> {
        self.inner
            .rows
            .iter()
            .map(|r| {
                let c = r.counts;
                (r.strategy.to_string(), r.t, c.tp, c.fp, c.fn_, c.tn, r.scores.f1)
            })
            .collect()
    }

    fn f1(&self, strategy: &str, t: usize) -> PyResult<Option<f64>> {
        Ok(self.inner.f1(strategy.parse().py()?, t))
    }

    fn mean_f1(&self, strategy: &str, thresholds: Vec<usize>) -> PyResult<Option<f64>> {
        Ok(self.inner.mean_f1(strategy.parse().py()?, thresholds))
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }
}

/// Synthesizes a reference of `n_rows` segments and draws reads from it.
#[pyfunction]
#[pyo3(signature = (condition="A", n_reads=256, n_rows=256, read_length=256, seed=1, profile=None))]
fn generate(
    condition: &str,
    n_reads: usize,
    n_rows: usize,
    read_length: usize,
    seed: u64,
    profile: Option<PyErrorProfile>,
) -> PyResult<PyDataset> {
    let spec = DatasetSpec {
        condition: condition.parse().py()?,
        n_reads,
        n_rows,
        read_length,
        seed,
        ..Default::default()
    };
    let (store, reads) = match profile {
        None => eval::build_dataset(&spec).py()?,
        Some(p) => {
            let genome = genome::synthesize_genome(n_rows * read_length, seed).py()?;
            let store = genome::segment_reference(genome, read_length).py()?;
            let reads = eval::build_reads(&store, "custom".into(), p.inner, &spec).py()?;
            (store, reads)
        }
    };
    Ok(PyDataset { store, reads })
}

#[pyfunction]
fn edit_distance(a: &str, b: &str) -> PyResult<usize> {
    Ok(oracle::edit_distance(seq(a)?.bases(), seq(b)?.bases()))
}

#[pyfunction]
fn hamming_distance(a: &str, b: &str) -> PyResult<usize> {
    Ok(oracle::hamming(seq(a)?.bases(), seq(b)?.bases()).py()?.value)
}

/// Mismatching cells of `stored` against `read` under "ed_star" or "hd".
#[pyfunction]
#[pyo3(signature = (stored, read, mode="ed_star"))]
fn mismatch_count(stored: &str, read: &str, mode: &str) -> PyResult<usize> {
    cam::row_mismatch_count(seq(stored)?.bases(), seq(read)?.bases(), self::mode(mode)?).py()
}

#[pyfunction]
fn distinguishable_states(sigma_over_mu: f64) -> PyResult<Option<u64>> {
    cam::distinguishable_states(sigma_over_mu).py()
}

#[pyfunction]
#[pyo3(signature = (n_mis, cols=256, vdd=1.2, sigma_over_mu=0.014))]
fn matchline_variance(n_mis: usize, cols: usize, vdd: f64, sigma_over_mu: f64) -> f64 {
    cam::eq2_variance(n_mis, cols, vdd, sigma_over_mu)
}

#[pyfunction]
#[pyo3(signature = (n_mis, config=None, noise=None, seed=0))]
fn matchline_voltage(n_mis: usize, config: Option<PyArrayConfig>, noise: Option<PyNoiseModel>, seed: u64) -> PyResult<f64> {
    let config = config.map(|c| c.inner).unwrap_or_default();
    let noise = noise.map(|n| n.inner).unwrap_or_default();
    cam::matchline_voltage(n_mis, &config, &noise, seed).py()
}

#[pyfunction]
#[pyo3(signature = (v_ml, t, config=None))]
fn sense(v_ml: f64, t: usize, config: Option<PyArrayConfig>) -> bool {
    cam::sense(v_ml, t, &config.map(|c| c.inner).unwrap_or_default())
}

/// Search energy in joules for one row, or one array with `per_array`.
#[pyfunction]
#[pyo3(signature = (n_mis, config=None, mu_c=2e-15, per_array=false))]
fn energy_per_search(n_mis: usize, config: Option<PyArrayConfig>, mu_c: f64, per_array: bool) -> PyResult<f64> {
    let noise = cam::NoiseModel { mu_c, ..Default::default() };
    let scope = if per_array { cam::EnergyScope::PerArray } else { cam::EnergyScope::PerRow };
    Ok(cam::energy_per_search(n_mis, &config.map(|c| c.inner).unwrap_or_default(), &noise, scope)
        .py()?
        .joules_per_search)
}

#[pyfunction]
#[pyo3(signature = (profile, t, alpha=200.0, beta=0.5))]
fn hdac_probability(profile: PyErrorProfile, t: usize, alpha: f64, beta: f64) -> PyResult<f64> {
    let params = HdacParams { alpha, beta, ..Default::default() };
    correction::hdac_probability(&profile.inner, t, &params).py()
}

#[pyfunction]
#[pyo3(signature = (profile, m=256, gamma=2e-4))]
fn tasr_lower_bound(profile: PyErrorProfile, m: usize, gamma: f64) -> Option<usize> {
    let params = TasrParams { gamma, ..Default::default() };
    correction::tasr_lower_bound(&profile.inner, m, &params)
}

#[pyfunction]
fn compute_f1(tp: u64, fp: u64, fn_: u64, tn: u64) -> (Option<f64>, Option<f64>, Option<f64>) {
    let s = eval::compute_f1(&eval::ConfusionCounts::new(tp, fp, fn_, tn));
    (s.sensitivity, s.precision, s.f1)
}

/// `(sigma_over_mu, n_mis, var_empirical, var_eq2, rel_err)`.
type SweepPoint = (f64, usize, f64, f64, f64);

/// One [`SweepPoint`] per grid point.
#[pyfunction]
#[pyo3(signature = (sigmas, points, trials=10_000, seed=1))]
fn sweep_noise(sigmas: Vec<f64>, points: Vec<usize>, trials: usize, seed: u64) -> PyResult<Vec<SweepPoint>> {
    let rows = eval::sweep_noise(&sigmas, &points, trials, seed, &cam::ArrayConfig::default()).py()?;
    Ok(rows
        .into_iter()
        .map(|r| (r.sigma_over_mu, r.n_mis, r.var_empirical, r.var_eq2, r.rel_err))
        .collect())
}

#[pymodule]
pub fn asmcap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyArrayConfig>()?;
    m.add_class::<PyNoiseModel>()?;
    m.add_class::<PyErrorProfile>()?;
    m.add_class::<PyReadRecord>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(edit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(hamming_distance, m)?)?;
    m.add_function(wrap_pyfunction!(mismatch_count, m)?)?;
    m.add_function(wrap_pyfunction!(distinguishable_states, m)?)?;
    m.add_function(wrap_pyfunction!(matchline_variance, m)?)?;
    m.add_function(wrap_pyfunction!(matchline_voltage, m)?)?;
    m.add_function(wrap_pyfunction!(sense, m)?)?;
    m.add_function(wrap_pyfunction!(energy_per_search, m)?)?;
    m.add_function(wrap_pyfunction!(hdac_probability, m)?)?;
    m.add_function(wrap_pyfunction!(tasr_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(compute_f1, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_noise, m)?)?;
    Ok(())
}
