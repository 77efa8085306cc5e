use std::fs;
use std::path::{Path, PathBuf};

use datamap::data::read_idx;
use datamap::experiments::{self, rbm_mse, stack_mse, ScanConfig};
use datamap::model_io;
use datamap::rbm::{self, LearningRate};
use datamap::stack::{self, StackEvent};
use datamap::{gradcheck, ActivationKind, Matrix, Prng, RbmParams, RbmStack, Scheme, StackSpec, TrainConfig};

use crate::artifacts::{write_energy, write_summary, write_triplets, Triplet};
use crate::config::FileConfig;
use crate::{CliError, Common, Images, Scan, Training};

pub const DEFAULT_DATA: &str = "data/t10k-images-idx3-ubyte.gz";

struct Context {
    out: PathBuf,
    seed: u64,
}

impl Context {
    fn resolve(file: &FileConfig, common: &Common) -> Result<Self, CliError> {
        let out = match file.pick(common.out.clone(), "out")? {
            Some(p) => p,
            None => std::env::var_os("DATAMAP_OUT").map_or_else(|| PathBuf::from("out"), PathBuf::from),
        };
        Ok(Self {
            out,
            seed: file.pick(common.seed, "seed")?.unwrap_or(42),
        })
    }

    fn create(&self) -> Result<&Path, CliError> {
        fs::create_dir_all(&self.out).map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        Ok(&self.out)
    }
}

fn load_config(common: &Common) -> Result<(FileConfig, Context), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let ctx = Context::resolve(&file, common)?;
    Ok((file, ctx))
}

fn train_config(file: &FileConfig, t: &Training, seed: u64) -> Result<TrainConfig, CliError> {
    let scheme = file.pick(t.scheme, "scheme")?.unwrap_or_default();
    let default_rate = match scheme {
        Scheme::Gd => 0.01,
        Scheme::Fd => 0.005,
    };
    Ok(TrainConfig {
        scheme,
        rate: LearningRate::Scalar(file.pick(t.rate, "rate")?.unwrap_or(default_rate)),
        energy: file.pick(t.energy, "energy")?.unwrap_or_default(),
        epochs: file.pick(t.epochs, "epochs")?.unwrap_or(100),
        seed,
        shuffle: file.switch(t.no_shuffle, "shuffle", true)?,
    })
}

struct ImageOptions {
    data: PathBuf,
    train_count: usize,
    limit: Option<usize>,
    downsample: usize,
    triplets: usize,
}

impl ImageOptions {
    fn resolve(file: &FileConfig, i: &Images) -> Result<Self, CliError> {
        Ok(Self {
            data: file
                .pick(i.data.clone(), "data")?
                .unwrap_or_else(|| PathBuf::from(DEFAULT_DATA)),
            train_count: file.pick(i.train_count, "train-count")?.unwrap_or(9000),
            limit: file.pick(i.limit, "limit")?,
            downsample: file.pick(i.downsample, "downsample")?.unwrap_or(1),
            triplets: file.pick(i.triplets, "triplets")?.unwrap_or(10),
        })
    }

    fn load(&self) -> Result<ImageSet, CliError> {
        let mut idx = read_idx(&self.data).map_err(|e| match e {
            datamap::Error::Io(io) => CliError::Io(format!("{}: {io}", self.data.display())),
            other => other.into(),
        })?;
        if self.downsample != 1 {
            idx = idx.downsample(self.downsample)?;
        }
        let split = self.train_count.min(idx.count());
        let test = idx.images.split_off(split);
        let mut train = idx.images;
        if let Some(limit) = self.limit {
            train.truncate(limit);
        }
        if train.is_empty() {
            return Err(CliError::Config("no training images selected".into()));
        }
        Ok(ImageSet {
            rows: idx.rows,
            cols: idx.cols,
            train,
            test,
            triplets: self.triplets,
        })
    }
}

struct ImageSet {
    rows: usize,
    cols: usize,
    train: Vec<Matrix>,
    test: Vec<Matrix>,
    triplets: usize,
}

impl ImageSet {
    fn pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Held-out images, or training images when nothing is held out.
    fn shown(&self) -> &[Matrix] {
        let pool = if self.test.is_empty() { &self.train } else { &self.test };
        &pool[..self.triplets.min(pool.len())]
    }

    fn test_mse(&self, f: impl Fn(&[Matrix]) -> datamap::Result<f64>) -> Result<f64, CliError> {
        if self.test.is_empty() {
            Ok(f64::NAN)
        } else {
            Ok(f(&self.test)?)
        }
    }
}

fn parse_sizes(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(format!("layer sizes {text:?}: {e}")))
}

fn check_input(sizes: &[usize], images: &ImageSet) -> Result<(), CliError> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(CliError::Config(format!(
            "need at least two positive sizes, got {sizes:?}"
        )));
    }
    if sizes[0] != images.pixels() {
        return Err(CliError::Config(format!(
            "input size {} does not match {}x{} images",
            sizes[0], images.rows, images.cols
        )));
    }
    Ok(())
}

fn save_rbm(params: &RbmParams, path: &Path) -> Result<(), CliError> {
    Ok(model_io::save_rbm(params, path)?)
}

fn rbm_triplets(dir: &Path, params: &RbmParams, images: &ImageSet) -> Result<(), CliError> {
    let shown = images.shown();
    let mut parts = Vec::with_capacity(shown.len());
    for x in shown {
        let state = params.round_trip(x)?;
        parts.push((state.x_post, state.y_post));
    }
    let triplets: Vec<Triplet> = shown
        .iter()
        .zip(&parts)
        .map(|(x, (r, c))| Triplet {
            original: x,
            reconstruction: r,
            code: c,
        })
        .collect();
    write_triplets(dir, images.rows, images.cols, &triplets)?;
    Ok(())
}

fn stack_triplets(dir: &Path, stack: &RbmStack, images: &ImageSet) -> Result<(), CliError> {
    let shown = images.shown();
    let mut parts = Vec::with_capacity(shown.len());
    for x in shown {
        let code = stack.encode(x)?;
        parts.push((stack.decode(&code)?, code));
    }
    let triplets: Vec<Triplet> = shown
        .iter()
        .zip(&parts)
        .map(|(x, (r, c))| Triplet {
            original: x,
            reconstruction: r,
            code: c,
        })
        .collect();
    write_triplets(dir, images.rows, images.cols, &triplets)?;
    Ok(())
}

fn progress(layer: Option<usize>, epoch: usize, energy: f64) {
    match layer {
        Some(k) => eprintln!("layer {} epoch {epoch}: mean energy {energy:.6e}", k + 1),
        None => eprintln!("epoch {epoch}: mean energy {energy:.6e}"),
    }
}

pub fn train_rbm(
    common: &Common,
    training: &Training,
    images: &Images,
    shape: Option<String>,
    act_h: Option<ActivationKind>,
    act_v: Option<ActivationKind>,
) -> Result<(), CliError> {
    let (file, ctx) = load_config(common)?;
    let config = train_config(&file, training, ctx.seed)?;
    let opts = ImageOptions::resolve(&file, images)?;
    let sizes = parse_sizes(&file.pick(shape, "shape")?.unwrap_or_else(|| "784,49".into()))?;
    let act_h = file.pick(act_h, "act-h")?.unwrap_or(ActivationKind::Identity);
    let act_v = file.pick(act_v, "act-v")?.unwrap_or(ActivationKind::Identity);
    file.finish()?;
    if sizes.len() != 2 {
        return Err(CliError::Config(format!("--shape needs visible,hidden, got {sizes:?}")));
    }

    let data = opts.load()?;
    check_input(&sizes, &data)?;
    let init = RbmParams::init(
        sizes[0],
        sizes[1],
        1,
        act_h.into(),
        act_v.into(),
        &mut Prng::new(ctx.seed),
    )?;
    let out = rbm::train(init, &data.train, &config, &mut |e, en| progress(None, e, en))?;

    let dir = ctx.create()?;
    save_rbm(&out.params, &dir.join("model.dmfd"))?;
    write_energy(&dir.join("energy.csv"), &out.energies)?;
    rbm_triplets(dir, &out.params, &data)?;
    let train_mse = rbm_mse(&out.params, &data.train)?;
    let test_mse = data.test_mse(|t| rbm_mse(&out.params, t))?;
    write_summary(&dir.join("summary.csv"), train_mse, test_mse)?;
    println!(
        "train mse {train_mse:.6e}, held-out mse {test_mse:.6e}; artifacts in {}",
        dir.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn train_stack(
    common: &Common,
    training: &Training,
    images: &Images,
    stack: Option<String>,
    layout: Option<String>,
    act_h: Option<ActivationKind>,
    act_v: Option<ActivationKind>,
) -> Result<(), CliError> {
    let (file, ctx) = load_config(common)?;
    let config = train_config(&file, training, ctx.seed)?;
    let opts = ImageOptions::resolve(&file, images)?;
    let sizes = parse_sizes(&file.pick(stack, "stack")?.unwrap_or_else(|| "784,784,196,49".into()))?;
    let layout = file.pick(layout, "layout")?.unwrap_or_else(|| "relu-softsign".into());
    let act_h = file.pick(act_h, "act-h")?.unwrap_or(ActivationKind::Identity);
    let act_v = file.pick(act_v, "act-v")?.unwrap_or(ActivationKind::Identity);
    file.finish()?;
    let spec = match layout.as_str() {
        "relu-softsign" => StackSpec::relu_softsign(&sizes)?,
        "uniform" => StackSpec::uniform(&sizes, act_h, act_v)?,
        other => return Err(CliError::Config(format!("unknown layout {other:?} (relu-softsign, uniform)"))),
    };

    let data = opts.load()?;
    check_input(&sizes, &data)?;
    let out = stack::train_greedy(&spec, &data.train, &config, &mut |e| {
        if let StackEvent::Epoch { layer, epoch, energy } = e {
            progress(Some(layer), epoch, energy)
        }
    })?;

    let dir = ctx.create()?;
    model_io::save_stack(&out.stack, dir.join("model.dmfs"))?;
    for (k, (layer, energies)) in out.stack.layers().iter().zip(&out.energies).enumerate() {
        save_rbm(layer, &dir.join(format!("layer-{}.dmfd", k + 1)))?;
        write_energy(&dir.join(format!("energy-layer-{}.csv", k + 1)), energies)?;
    }
    stack_triplets(dir, &out.stack, &data)?;
    let train_mse = stack_mse(&out.stack, &data.train)?;
    let test_mse = data.test_mse(|t| stack_mse(&out.stack, t))?;
    write_summary(&dir.join("summary.csv"), train_mse, test_mse)?;
    println!(
        "train mse {train_mse:.6e}, held-out mse {test_mse:.6e}; artifacts in {}",
        dir.display()
    );
    Ok(())
}

#[derive(Clone, Copy)]
pub enum ScanKind {
    Collinearity,
    Feature,
}

pub fn scan(common: &Common, s: &Scan, kind: ScanKind) -> Result<(), CliError> {
    let (file, ctx) = load_config(common)?;
    let defaults = ScanConfig::default();
    let config = ScanConfig {
        seed: ctx.seed,
        epochs: file.pick(s.epochs, "epochs")?.unwrap_or(defaults.epochs),
        rate: file.pick(s.rate, "rate")?.unwrap_or(defaults.rate),
        bias_scale: file.pick(s.bias_scale, "bias-scale")?.unwrap_or(defaults.bias_scale),
        scheme: file.pick(s.scheme, "scheme")?.unwrap_or(defaults.scheme),
        standardize: file.switch(s.no_standardize, "standardize", true)?,
        ..defaults
    };
    file.finish()?;
    if !(config.rate > 0.0 && config.bias_scale > 0.0) {
        return Err(CliError::Config("rates must be positive".into()));
    }
    let (curve, name, param) = match kind {
        ScanKind::Collinearity => (
            experiments::collinearity_scan(&config, &experiments::COLLINEARITY_NODES)?,
            "collinearity.csv",
            "nodes",
        ),
        ScanKind::Feature => (
            experiments::feature_scan(&config, &experiments::FEATURE_DIMS)?,
            "features.csv",
            "dim",
        ),
    };
    let dir = ctx.create()?;
    let csv = curve.to_csv(param);
    fs::write(dir.join(name), &csv).map_err(|e| CliError::Io(e.to_string()))?;
    print!("{csv}");
    Ok(())
}

pub fn gradcheck(common: &Common, seeds: Option<u64>) -> Result<(), CliError> {
    let (file, ctx) = load_config(common)?;
    let seeds = file.pick(seeds, "seeds")?.unwrap_or(20);
    file.finish()?;
    let report = gradcheck::run(seeds)?;
    let dir = ctx.create()?;
    let mut rows = Vec::new();
    let mut lines = String::from("act_h,act_v,m,n,d,max_error,repairs,pass\n");
    println!(
        "{:<9} {:<9} {:<10} {:>11} {:>8}  result",
        "hidden", "visible", "m,n,d", "max error", "repairs"
    );
    for c in &report.cells {
        let (m, n, d) = c.shape;
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!(
            "{:<9} {:<9} {:<10} {:>11.3e} {:>8}  {verdict} (≤ {:e})",
            c.act_h.name(),
            c.act_v.name(),
            format!("{m},{n},{d}"),
            c.max_error,
            c.repairs,
            c.tolerance()
        );
        lines.push_str(&format!(
            "{},{},{m},{n},{d},{},{},{}\n",
            c.act_h.name(),
            c.act_v.name(),
            datamap::data::format_f64(c.max_error),
            c.repairs,
            c.passed()
        ));
        rows.push(c);
    }
    fs::write(dir.join("gradcheck.csv"), lines).map_err(|e| CliError::Io(e.to_string()))?;
    if report.passed() {
        Ok(())
    } else {
        let failed = rows.iter().filter(|c| !c.passed()).count();
        Err(CliError::CheckFailed(format!(
            "{failed} gradient-check cells out of tolerance"
        )))
    }
}

pub fn reconstruct(common: &Common, images: &Images, model: Option<PathBuf>) -> Result<(), CliError> {
    let (file, ctx) = load_config(common)?;
    let opts = ImageOptions::resolve(&file, images)?;
    let model = file
        .pick(model, "model")?
        .ok_or_else(|| CliError::Config("--model is required".into()))?;
    file.finish()?;
    let bytes = fs::read(&model).map_err(|e| CliError::Io(format!("{}: {e}", model.display())))?;
    let stack = if bytes.starts_with(model_io::STACK_MAGIC) {
        model_io::decode_stack(&bytes)?
    } else {
        RbmStack::new(vec![model_io::decode_rbm(&bytes)?])?
    };
    let data = opts.load()?;
    let first = &stack.layers()[0];
    if first.visible() != data.pixels() || first.cols() != 1 {
        return Err(CliError::Config(format!(
            "model input {}x{} does not match {}x{} images",
            first.visible(),
            first.cols(),
            data.rows,
            data.cols
        )));
    }
    let dir = ctx.create()?;
    stack_triplets(dir, &stack, &data)?;
    let train_mse = stack_mse(&stack, &data.train)?;
    let test_mse = data.test_mse(|t| stack_mse(&stack, t))?;
    write_summary(&dir.join("summary.csv"), train_mse, test_mse)?;
    println!(
        "train mse {train_mse:.6e}, held-out mse {test_mse:.6e}; artifacts in {}",
        dir.display()
    );
    Ok(())
}
