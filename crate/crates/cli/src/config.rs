//! Experiment configuration: a flat key=value file.
//!
//! Paths inside the file resolve relative to the file's own directory, so
//! committed experiment configs stay relocatable. Unknown keys are
//! rejected; misspelled tuning knobs should fail loudly.

use anyhow::{anyhow, bail, Context};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub image: PathBuf,
    /// Center crop to crop x crop before acquiring (0 = use full image).
    pub crop: usize,
    pub ratios: Vec<f64>,
    pub orders: Vec<u32>,
    pub bank: String,
    pub levels: usize,
    /// Fallback lambda when no per-order value and no grid is given.
    pub lambda: f64,
    /// Per-order overrides, `lambda_p<k>` keys.
    pub lambda_per_order: BTreeMap<u32, f64>,
    /// Optional log grid; when present each entry picks the best PSNR.
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub noise_sigma: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub continuation_stages: usize,
    pub continuation_start: f64,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str, base: &Path) -> anyhow::Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value", lineno + 1))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }

        let mut take = |k: &str| map.remove(k);
        let image = take("image").ok_or_else(|| anyhow!("missing `image`"))?;
        let image = base.join(image);
        let crop = parse_or(take("crop"), 0usize)?;
        let ratios = parse_list::<f64>(take("ratios").ok_or_else(|| anyhow!("missing `ratios`"))?)?;
        let orders = parse_list::<u32>(take("orders").ok_or_else(|| anyhow!("missing `orders`"))?)?;
        let bank = take("bank").unwrap_or_else(|| "bior2.2".to_string());
        let levels = parse_or(take("levels"), 4usize)?;
        let lambda = parse_or(take("lambda"), 1e-3f64)?;
        let lambda_grid = match take("lambda_grid") {
            Some(s) => parse_list::<f64>(s)?,
            None => Vec::new(),
        };
        let seed = parse_or(take("seed"), 0u64)?;
        let out_dir = base.join(take("out_dir").unwrap_or_else(|| "results".to_string()));
        let noise_sigma = parse_or(take("noise_sigma"), 0.0f64)?;
        let max_iters = parse_or(take("max_iters"), 2000usize)?;
        let rel_tol = parse_or(take("rel_tol"), 1e-6f64)?;
        let continuation_stages = parse_or(take("continuation_stages"), 6usize)?;
        let continuation_start = parse_or(take("continuation_start"), 0.5f64)?;

        let mut lambda_per_order = BTreeMap::new();
        let keys: Vec<String> = map.keys().cloned().collect();
        for k in keys {
            if let Some(p) = k.strip_prefix("lambda_p") {
                let order: u32 = p.parse().map_err(|_| anyhow!("bad key `{k}`"))?;
                let v: f64 = map.remove(&k).unwrap().parse()?;
                lambda_per_order.insert(order, v);
            }
        }
        if let Some(k) = map.keys().next() {
            bail!("unknown config key `{k}`");
        }

        let cfg = ExperimentConfig {
            image,
            crop,
            ratios,
            orders,
            bank,
            levels,
            lambda,
            lambda_per_order,
            lambda_grid,
            seed,
            out_dir,
            noise_sigma,
            max_iters,
            rel_tol,
            continuation_stages,
            continuation_start,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.ratios.is_empty() || self.orders.is_empty() {
            bail!("ratios and orders must be non-empty");
        }
        for &r in &self.ratios {
            if !(r > 0.0 && r <= 1.0) {
                bail!("measurement ratio {r} outside (0, 1]");
            }
        }
        for &p in &self.orders {
            if p > 5 {
                bail!("spline order {p} outside 0..=5");
            }
        }
        if self.crop != 0 && !self.crop.is_power_of_two() {
            bail!("crop {} must be a power of two", self.crop);
        }
        Ok(())
    }

    /// Lambda for one (ratio, order) entry when no grid search is active.
    pub fn lambda_for(&self, order: u32) -> f64 {
        self.lambda_per_order
            .get(&order)
            .copied()
            .unwrap_or(self.lambda)
    }
}

fn parse_or<T: std::str::FromStr>(v: Option<String>, default: T) -> anyhow::Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    match v {
        None => Ok(default),
        Some(s) => Ok(s.parse()?),
    }
}

fn parse_list<T: std::str::FromStr>(s: String) -> anyhow::Result<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',')
        .map(|tok| tok.trim().parse::<T>().map_err(Into::into))
        .collect()
}
