use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::{SimConfig, MAX_RUNS_PER_FILL};
use crate::domain::{
    render_template, ActorRef, Configuration, DomainError, EntityRef, LhcFill, LogEntry, LogOrigin,
    PassStatus, Quality, ReconstructionPass, Role, Run, RunState, RunType, Tag, TagSet, Template,
    Timestamp,
};
use crate::store::{write_export, Catalog, ExportSummary, StoreError};

/// A log entry that was rendered from a template.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateUse {
    pub template_name: String,
    pub values: BTreeMap<String, String>,
    /// Tags added on top of the template defaults.
    pub extra_tags: TagSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimDataset {
    /// Generated entities; the audit trail is empty.
    pub catalog: Catalog,
    pub template_uses: BTreeMap<u64, TemplateUse>,
}

impl SimDataset {
    pub fn is_empty(&self) -> bool {
        self.catalog.is_empty()
    }

    /// Every entity satisfies its invariants and every reference resolves.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let report = self.catalog.check_integrity(|_| true);
        if report.is_ok() {
            Ok(())
        } else {
            Err(report.violations)
        }
    }

    /// Writes the dataset in the store export format (no audit records).
    pub fn export(&self, dest: &Path) -> Result<ExportSummary, StoreError> {
        write_export(dest, &self.catalog, |_| Ok(None))
    }
}

pub fn builtin_templates() -> Vec<Template> {
    let tags = |list: &[&str]| list.iter().map(|t| Tag::parse(t).expect("valid tag")).collect();
    let fields = |list: &[&str]| list.iter().map(|f| f.to_string()).collect();
    vec![
        Template {
            template_id: 1,
            template_name: "eos".into(),
            title_pattern: "EOS report {{shift}}".into(),
            body_pattern: "Shift {{shift}} on {{detector}}: {{summary}}".into(),
            required_fields: fields(&["shift", "detector"]),
            default_tags: tags(&["eos"]),
        },
        Template {
            template_id: 2,
            template_name: "run-quality".into(),
            title_pattern: "Run {{run}} quality {{quality}}".into(),
            body_pattern: "Run {{run}} flagged {{quality}} by {{detector}}. {{note}}".into(),
            required_fields: fields(&["run", "quality"]),
            default_tags: tags(&["quality"]),
        },
    ]
}

const DETECTORS: &[&str] = &["TPC", "ITS", "TOF", "TRD", "MFT", "MCH", "FT0", "EMC"];
const TAG_POOL: &[&str] = &["physics", "tpc", "its", "tof", "trd", "mft", "calibration", "test", "pp", "pbpb"];
const SHIFTERS: &[&str] = &["shifter-a", "shifter-b", "shifter-c", "rc-tpc", "rc-its"];
const LOG_TITLES: &[&str] = &[
    "Beam conditions",
    "Detector trip",
    "Trigger rate drop",
    "Configuration change",
    "Data quality check",
    "HV recovery",
];
const LOG_PHRASES: &[&str] = &[
    "rates nominal",
    "busy fraction high",
    "recovered after reconfiguration",
    "noisy channels masked",
    "calibration objects uploaded",
    "no action needed",
    "expert called",
];

struct Gen {
    rng: ChaCha8Rng,
    config: SimConfig,
    cursor: Timestamp,
    cat: Catalog,
    template_uses: BTreeMap<u64, TemplateUse>,
}

fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let d = Poisson::new(lambda).expect("positive finite lambda");
    d.sample(rng) as u64
}

impl Gen {
    fn advance(&mut self, min_secs: u64, max_secs: u64) -> Timestamp {
        let secs = self.rng.random_range(min_secs..=max_secs) as i64;
        self.cursor = self.cursor.checked_add_millis(secs * 1000).unwrap_or(Timestamp::MAX);
        self.cursor
    }

    fn duration_ms(&mut self) -> i64 {
        let (lo, hi) = (self.config.min_duration_secs.ln(), self.config.max_duration_secs.ln());
        let secs = if hi > lo { self.rng.random_range(lo..hi).exp() } else { lo.exp() };
        (secs * 1000.0).round() as i64
    }

    fn pick<'a>(&mut self, items: &'a [&'a str]) -> &'a str {
        items.choose(&mut self.rng).copied().expect("non-empty pool")
    }

    fn weighted<T: Copy>(&mut self, choices: &[(T, u32)]) -> T {
        let total: u32 = choices.iter().map(|c| c.1).sum();
        let mut x = self.rng.random_range(0..total);
        for &(value, weight) in choices {
            if x < weight {
                return value;
            }
            x -= weight;
        }
        choices[choices.len() - 1].0
    }

    fn run(&mut self, fill_number: Option<u64>) -> u64 {
        let run_type = if fill_number.is_some() {
            self.weighted(&[
                (RunType::Global, 85),
                (RunType::DetectorCalibration, 10),
                (RunType::Technical, 5),
            ])
        } else {
            self.weighted(&[
                (RunType::Cosmics, 50),
                (RunType::DetectorCalibration, 30),
                (RunType::Technical, 20),
            ])
        };
        let start = self.advance(30, 600);
        let duration = self.duration_ms();
        let end = start.checked_add_millis(duration).unwrap_or(Timestamp::MAX);
        self.cursor = end;

        let mut tags = TagSet::new();
        if run_type == RunType::Cosmics {
            tags.insert(Tag::parse("cosmics").expect("valid tag"));
        }
        for _ in 0..self.rng.random_range(0..=2) {
            let t = self.pick(TAG_POOL);
            tags.insert(Tag::parse(t).expect("valid tag"));
        }
        let mut configuration = Configuration::new();
        let n_det = self.rng.random_range(1..=4);
        let dets: Vec<&str> = DETECTORS.choose_multiple(&mut self.rng, n_det).copied().collect();
        configuration.insert("detectors".into(), dets.join(","));
        configuration.insert("trigger".into(), self.pick(&["minimum-bias", "continuous", "cosmic", "pulser"]).into());

        let run_number = self.cat.next_run_number();
        let mut run = Run::start(run_number, run_type, start, fill_number, configuration, tags);
        run.state = RunState::Ended;
        run.end_time = Some(end);
        run.quality = self.weighted(&[(Quality::Good, 70), (Quality::Bad, 10), (Quality::Unknown, 20)]);
        self.cat.runs.insert(run_number, run);
        run_number
    }

    fn passes_for(&mut self, run_number: u64) -> Vec<u64> {
        if !self.rng.random_bool(self.config.p_pass_per_run) {
            return Vec::new();
        }
        let depth = self.rng.random_range(1..=self.config.max_pass_chain);
        let run_end = self.cat.runs[&run_number].end_time.expect("generated runs are ended");
        let mut input = EntityRef::run(run_number);
        let mut ids = Vec::new();
        for level in 1..=depth {
            let pass_id = self.cat.next_pass_id();
            let status = self.weighted(&[
                (PassStatus::Done, 80),
                (PassStatus::Failed, 10),
                (PassStatus::Running, 5),
                (PassStatus::Pending, 5),
            ]);
            let mut configuration = Configuration::new();
            configuration.insert("software".into(), format!("O2-{}.{}", 20 + level, self.rng.random_range(0..10)));
            let pass = ReconstructionPass {
                pass_id,
                name: format!("apass{level}"),
                input,
                configuration,
                status,
                created_at: run_end
                    .checked_add_millis(level as i64 * 6 * 3_600_000)
                    .unwrap_or(Timestamp::MAX),
            };
            self.cat.passes.insert(pass_id, pass);
            ids.push(pass_id);
            input = EntityRef::pass(pass_id);
        }
        ids
    }

    fn template(&mut self, name: &str) -> Template {
        let template = builtin_templates()
            .into_iter()
            .find(|t| t.template_name == name)
            .expect("builtin template");
        if !self.cat.templates.contains_key(name) {
            let mut stored = template.clone();
            stored.template_id = self.cat.next_template_id();
            self.cat.templates.insert(name.to_string(), stored);
        }
        self.cat.templates[name].clone()
    }

    fn logs_for(&mut self, run_number: u64, passes: &[u64]) {
        let n = poisson(&mut self.rng, self.config.logs_per_run);
        let run = self.cat.runs[&run_number].clone();
        let span = run.start_time.millis_until(run.end_time.expect("ended")).max(1);
        for _ in 0..n {
            let log_id = self.cat.next_log_id();
            let machine = self.rng.random_bool(0.4);
            let author = if machine {
                ActorRef::new("o2-ecs", Role::Machine).expect("non-empty")
            } else {
                let who = self.pick(SHIFTERS);
                let role = if who.starts_with("rc-") { Role::RunCoordinator } else { Role::Shifter };
                ActorRef::new(who, role).expect("non-empty")
            };
            let origin = if machine { LogOrigin::Process } else { LogOrigin::Human };
            let created_at = run
                .start_time
                .checked_add_millis(self.rng.random_range(0..span))
                .unwrap_or(Timestamp::MAX);
            let mut associations = vec![EntityRef::run(run_number)];
            if let Some(f) = run.fill_number {
                if self.rng.random_bool(0.3) {
                    associations.push(EntityRef::fill(f));
                }
            }
            if !passes.is_empty() && self.rng.random_bool(0.2) {
                let p = *passes.choose(&mut self.rng).expect("non-empty");
                associations.push(EntityRef::pass(p));
            }
            let mut extra_tags = TagSet::new();
            if self.rng.random_bool(0.5) {
                extra_tags.insert(Tag::parse(self.pick(TAG_POOL)).expect("valid tag"));
            }

            let (title, body, tags) = if self.rng.random_bool(self.config.p_template_log) {
                let detector = self.pick(DETECTORS).to_string();
                let (name, values): (&str, Vec<(&str, String)>) = if self.rng.random_bool(0.5) {
                    let shift = self.pick(&["morning", "afternoon", "night"]).to_string();
                    let summary = self.pick(LOG_PHRASES).to_string();
                    ("eos", vec![("shift", shift), ("detector", detector), ("summary", summary)])
                } else {
                    let quality = run.quality.to_string().to_lowercase();
                    let note = self.pick(LOG_PHRASES).to_string();
                    (
                        "run-quality",
                        vec![
                            ("run", run_number.to_string()),
                            ("quality", quality),
                            ("detector", detector),
                            ("note", note),
                        ],
                    )
                };
                let values: BTreeMap<String, String> =
                    values.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
                let template = self.template(name);
                let rendered = render_template(&template, &values).expect("builtin values cover required fields");
                self.template_uses.insert(
                    log_id,
                    TemplateUse { template_name: name.to_string(), values, extra_tags: extra_tags.clone() },
                );
                let mut tags = rendered.tags;
                tags.extend(extra_tags);
                (rendered.title, rendered.body, tags)
            } else {
                let title = format!("{} (run {run_number})", self.pick(LOG_TITLES));
                let body = format!("{}: {}.", self.pick(DETECTORS), self.pick(LOG_PHRASES));
                (title, body, extra_tags)
            };
            let log = LogEntry::create(log_id, title, body, author, origin, created_at, associations, tags);
            self.cat.logs.insert(log_id, log);
        }
    }
}

pub fn generate(config: &SimConfig) -> Result<SimDataset, DomainError> {
    config.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        config: config.clone(),
        cursor: config.start,
        cat: Catalog::default(),
        template_uses: BTreeMap::new(),
    };
    let p = config.p_run_without_fill;
    let mean = config.mean_runs_per_fill;
    let (in_fill_mean, between_mean) = if p >= 1.0 { (0.0, mean) } else { (mean, mean * p / (1.0 - p)) };

    for i in 0..config.n_fills {
        let between = poisson(&mut g.rng, between_mean);
        let mut run_numbers = Vec::new();
        for _ in 0..between {
            run_numbers.push(g.run(None));
        }

        let fill_number = config.first_fill_number + i;
        let created_at = g.advance(600, 3_600);
        let beam_type = g.weighted(&[("p-p", 80), ("Pb-Pb", 15), ("p-Pb", 5)]).to_string();
        let beams_start = g.advance(1_800, 5_400);
        let in_fill = poisson(&mut g.rng, in_fill_mean).min(MAX_RUNS_PER_FILL);
        for _ in 0..in_fill {
            run_numbers.push(g.run(Some(fill_number)));
        }
        let beams_end = g.advance(60, 1_800);
        g.cat.fills.insert(
            fill_number,
            LhcFill {
                fill_number,
                stable_beams_start: Some(beams_start),
                stable_beams_end: Some(beams_end),
                beam_type,
                created_at,
            },
        );

        for run_number in run_numbers {
            let passes = g.passes_for(run_number);
            g.logs_for(run_number, &passes);
        }
    }
    Ok(SimDataset { catalog: g.cat, template_uses: g.template_uses })
}
