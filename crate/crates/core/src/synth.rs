//! Synthetic corpus generator with planted behaviour-to-quality mechanics.
//!
//! Each designer has three traits in `[0, 1]`. Skill shifts commands from the
//! ribbon to accelerator keys and reduces dialog button clicks. Unstable intent
//! raises the rate of delete operations. Low engagement adds idle gaps inside
//! sessions and lengthens the breaks between them. The true score is a clamped
//! linear function of the traits plus Gaussian noise, so a model trained on
//! window features has a known signal to recover.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Beta, Distribution, Exp, Geometric, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{format_journal_line, write_tracker, TrackerKind, TrackerRecord, TRANSACTION_SUCCESSFUL};
use crate::quality::{self, AssessmentInput, QualityScore, TOTAL_MAX, TOTAL_MIN};
use crate::rng::{self, Rng};
use crate::ticks::{from_ticks, to_ticks, CivilDateTime, TickTime, MS_PER_DAY, MS_PER_MINUTE};
use crate::par;

pub const GENERATOR_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid generator configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("trait `{0}` = {1} lies outside [0, 1]")]
    TraitOutOfRange(&'static str, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignerProfile {
    pub skill: f64,
    pub intent_stability: f64,
    pub engagement: f64,
    pub seed: u64,
}

impl DesignerProfile {
    pub fn validate(&self) -> Result<(), SynthError> {
        for (name, v) in [
            ("skill", self.skill),
            ("intent_stability", self.intent_stability),
            ("engagement", self.engagement),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SynthError::TraitOutOfRange(name, v));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    Small,
}

/// Frozen generator constants. Rates are relative event-type weights before
/// normalisation; times are milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mechanics {
    pub score_intercept: f64,
    pub score_skill: f64,
    pub score_stability: f64,
    pub score_engagement: f64,

    pub w_keypress: f64,
    pub w_command: f64,
    pub w_pushbutton: f64,
    pub w_pushbutton_skill: f64,
    pub w_transaction_ok: f64,
    pub w_transaction_other: f64,
    pub w_added: f64,
    pub w_modified: f64,
    pub w_deleted: f64,
    pub w_deleted_instability: f64,
    pub w_other_jrn: f64,

    pub command_internal_share: f64,
    pub command_accel_share: f64,
    pub command_accel_skill: f64,
    /// Fraction of the skill-driven shortcut gain kept at zero engagement.
    pub accel_engagement_floor: f64,
    /// Steepness of the logistic curve mapping skill to method mix.
    pub skill_steepness: f64,
    /// Exponents applied to `1 - trait` for the delete and idle rates.
    pub instability_exponent: f64,
    pub disengagement_exponent: f64,
    pub undo_share: f64,

    pub added_mean: f64,
    pub deleted_mean: f64,
    pub modified_mean: f64,

    pub gap_median_ms: f64,
    pub gap_sigma: f64,
    pub gap_cap_ms: u64,
    pub short_pause_prob: f64,
    pub idle_prob_disengaged: f64,
    pub idle_long_share: f64,
    pub idle_long_extra_mean_ms: f64,
    pub session_gap_base_ms: u64,
    pub session_gap_disengaged_ms: u64,
    pub session_gap_jitter_ms: u64,
}

impl Default for Mechanics {
    fn default() -> Self {
        Mechanics {
            score_intercept: 44.0,
            score_skill: 25.0,
            score_stability: 18.0,
            score_engagement: 11.0,
            w_keypress: 0.18,
            w_command: 0.22,
            w_pushbutton: 0.10,
            w_pushbutton_skill: -0.07,
            w_transaction_ok: 0.12,
            w_transaction_other: 0.01,
            w_added: 0.14,
            w_modified: 0.12,
            w_deleted: 0.015,
            w_deleted_instability: 0.14,
            w_other_jrn: 0.03,
            command_internal_share: 0.20,
            command_accel_share: 0.10,
            command_accel_skill: 0.55,
            accel_engagement_floor: 0.3,
            skill_steepness: 16.0,
            instability_exponent: 3.0,
            disengagement_exponent: 3.0,
            undo_share: 0.05,
            added_mean: 1.6,
            deleted_mean: 1.5,
            modified_mean: 3.0,
            gap_median_ms: 2500.0,
            gap_sigma: 0.9,
            gap_cap_ms: 59_000,
            short_pause_prob: 0.002,
            idle_prob_disengaged: 0.008,
            idle_long_share: 0.65,
            idle_long_extra_mean_ms: 240_000.0,
            session_gap_base_ms: 20 * MS_PER_MINUTE,
            session_gap_disengaged_ms: 100 * MS_PER_MINUTE,
            session_gap_jitter_ms: 20 * MS_PER_MINUTE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub preset: Preset,
    pub n_designers: usize,
    /// Inclusive range.
    pub sessions_per_designer: (usize, usize),
    /// Inclusive range of behavioural records per designer.
    pub events_per_designer: (usize, usize),
    pub noise_sd: f64,
    /// Mean number of non-behavioural journal lines written per journal record.
    pub system_lines_per_record: f64,
    pub mechanics: Mechanics,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self::preset(Preset::Paper)
    }
}

impl GenConfig {
    pub fn preset(preset: Preset) -> Self {
        let (sessions, events, system) = match preset {
            Preset::Paper => ((8, 14), (35_000, 85_000), 1.0),
            Preset::Small => ((4, 8), (4_000, 8_000), 0.5),
        };
        GenConfig {
            preset,
            n_designers: 68,
            sessions_per_designer: sessions,
            events_per_designer: events,
            noise_sd: 2.0,
            system_lines_per_record: system,
            mechanics: Mechanics::default(),
        }
    }

    pub fn small() -> Self {
        Self::preset(Preset::Small)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let (s0, s1) = self.sessions_per_designer;
        let (e0, e1) = self.events_per_designer;
        if self.n_designers == 0 {
            return Err(SynthError::InvalidConfig("n_designers must be at least 1"));
        }
        if s0 == 0 || s0 > s1 {
            return Err(SynthError::InvalidConfig("sessions_per_designer must be a non-empty range from 1"));
        }
        if e0 > e1 || e0 < s1 {
            return Err(SynthError::InvalidConfig("events_per_designer must be non-empty and allow one event per session"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(SynthError::InvalidConfig("noise_sd must be finite and non-negative"));
        }
        if !(self.system_lines_per_record >= 0.0 && self.system_lines_per_record.is_finite()) {
            return Err(SynthError::InvalidConfig("system_lines_per_record must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Unclamped, unrounded score of a profile for a noise draw.
pub fn raw_score(profile: &DesignerProfile, noise: f64, m: &Mechanics) -> f64 {
    m.score_intercept
        + m.score_skill * profile.skill
        + m.score_stability * profile.intent_stability
        + m.score_engagement * profile.engagement
        + noise
}

pub fn true_score(profile: &DesignerProfile, noise: f64, m: &Mechanics) -> i32 {
    let raw = raw_score(profile, noise, m);
    (libm::round(raw).clamp(TOTAL_MIN as f64, TOTAL_MAX as f64)) as i32
}

/// Event kinds drawn by the generator, in weight order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SynthEvent {
    KeyPress,
    Command,
    PushButton,
    TransactionOk,
    TransactionOther,
    Added,
    Modified,
    Deleted,
    OtherJrn,
}

const EVENT_KINDS: [SynthEvent; 9] = [
    SynthEvent::KeyPress,
    SynthEvent::Command,
    SynthEvent::PushButton,
    SynthEvent::TransactionOk,
    SynthEvent::TransactionOther,
    SynthEvent::Added,
    SynthEvent::Modified,
    SynthEvent::Deleted,
    SynthEvent::OtherJrn,
];

/// The rates a profile induces, recorded in the ground truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignerRates {
    /// Normalised probabilities for each [`SynthEvent`] in declaration order.
    pub event_probs: Vec<f64>,
    pub command_ribbon: f64,
    pub command_accel: f64,
    pub command_internal: f64,
    pub undo_share: f64,
    pub idle_prob: f64,
    pub session_gap_mean_ms: f64,
}

/// Logistic curve through (0, 0) and (1, 1), steepest at 0.5.
fn s_curve(x: f64, k: f64) -> f64 {
    let f = |t: f64| 1.0 / (1.0 + libm::exp(-k * (t - 0.5)));
    (f(x) - f(0.0)) / (f(1.0) - f(0.0))
}

pub fn rates(profile: &DesignerProfile, m: &Mechanics) -> DesignerRates {
    let skill = s_curve(profile.skill, m.skill_steepness);
    let instability = libm::pow(1.0 - profile.intent_stability, m.instability_exponent);
    let disengagement = libm::pow(1.0 - profile.engagement, m.disengagement_exponent);
    let weights = [
        m.w_keypress,
        m.w_command,
        m.w_pushbutton + m.w_pushbutton_skill * skill,
        m.w_transaction_ok,
        m.w_transaction_other,
        m.w_added,
        m.w_modified,
        m.w_deleted + m.w_deleted_instability * instability,
        m.w_other_jrn,
    ];
    let total: f64 = weights.iter().sum();
    let accel = m.command_accel_share + m.command_accel_skill * skill
        * (m.accel_engagement_floor + (1.0 - m.accel_engagement_floor) * profile.engagement);
    DesignerRates {
        event_probs: weights.iter().map(|w| w / total).collect(),
        command_ribbon: 1.0 - m.command_internal_share - accel,
        command_accel: accel,
        command_internal: m.command_internal_share,
        undo_share: m.undo_share,
        idle_prob: m.idle_prob_disengaged * disengagement,
        session_gap_mean_ms: m.session_gap_base_ms as f64
            + m.session_gap_disengaged_ms as f64 * (1.0 - profile.engagement)
            + m.session_gap_jitter_ms as f64 / 2.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignerTruth {
    pub designer_id: String,
    pub profile: DesignerProfile,
    pub noise: f64,
    pub true_score: i32,
    pub assessment: AssessmentInput,
    pub parts: QualityScore,
    pub sessions: usize,
    pub events: usize,
    pub rates: DesignerRates,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionFiles {
    /// 1-based session number.
    pub index: usize,
    pub journal: String,
    pub tracker: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedDesigner {
    pub truth: DesignerTruth,
    pub sessions: Vec<SessionFiles>,
}

/// Everything needed to re-derive a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub generator_version: u32,
    pub master_seed: u64,
    pub config: GenConfig,
    pub designers: Vec<DesignerTruth>,
}

pub fn designer_id(index: usize) -> String {
    format!("D{:03}", index + 1)
}

/// Traits ~ Beta(2, 2) from the designer's own stream.
pub fn draw_profile(master_seed: u64, index: usize) -> DesignerProfile {
    let mut r = rng::stream(master_seed, index as u64);
    let beta = Beta::new(2.0, 2.0).expect("valid beta parameters");
    DesignerProfile {
        skill: beta.sample(&mut r),
        intent_stability: beta.sample(&mut r),
        engagement: beta.sample(&mut r),
        seed: rng::derive_seed(master_seed, (1u64 << 32) | index as u64),
    }
}

const COMMANDS: [&str; 12] = [
    "Create a wall , ID_OBJECTS_WALL",
    "Create a door , ID_OBJECTS_DOOR",
    "Create a window , ID_OBJECTS_WINDOW",
    "Create a floor , ID_OBJECTS_FLOOR",
    "Place a column , ID_OBJECTS_STRUCTURAL_COLUMN",
    "Create a beam , ID_OBJECTS_BEAM",
    "Create a roof by footprint , ID_OBJECTS_ROOF_FOOTPRINT",
    "Align elements , ID_ALIGN",
    "Move selected elements , ID_EDIT_MOVE",
    "Copy selected elements , ID_EDIT_COPY",
    "Open a view , ID_VIEW_OPEN",
    "Dimension , ID_ANNOTATIONS_DIMENSION_ALIGNED",
];
const UNDO_COMMANDS: [&str; 2] = ["Undo the last action , ID_EDIT_UNDO", "Cancel the current operation , ID_CANCEL_EDITOR"];
const DIALOGS: [&str; 4] = [
    "Modal , Revit , Dialog_Revit_DocWarnDialog",
    "Modal , Properties , Dialog_Revit_TypeProperties",
    "Modal , Save Changes , Dialog_Revit_SaveChanges",
    "Modal , Options , Dialog_Revit_Options",
];
const BUTTONS: [&str; 3] = ["IDOK", "Apply", "Close"];
const ELEMENTS: [&str; 8] = ["Walls", "Doors", "Windows", "Floors", "Columns", "Beams", "Roofs", "Stairs"];
const KEYS: [&str; 10] = ["W", "A", "D", "M", "C", "Esc", "Enter", "Ctrl", "Shift", "Space"];

struct Sampler {
    cumulative: [f64; 9],
    gap: LogNormal<f64>,
    long_extra: Exp<f64>,
    added: Geometric,
    deleted: Geometric,
    modified: Geometric,
}

impl Sampler {
    fn new(r: &DesignerRates, m: &Mechanics) -> Self {
        let mut cumulative = [0.0; 9];
        let mut acc = 0.0;
        for (c, p) in cumulative.iter_mut().zip(&r.event_probs) {
            acc += p;
            *c = acc;
        }
        let geo = |mean: f64| Geometric::new(1.0 / mean.max(1.0)).expect("valid geometric parameter");
        Sampler {
            cumulative,
            gap: LogNormal::new(libm::log(m.gap_median_ms), m.gap_sigma).expect("valid lognormal"),
            long_extra: Exp::new(1.0 / m.idle_long_extra_mean_ms).expect("valid exponential"),
            added: geo(m.added_mean),
            deleted: geo(m.deleted_mean),
            modified: geo(m.modified_mean),
        }
    }

    fn kind(&self, u: f64) -> SynthEvent {
        let k = self.cumulative.iter().position(|&c| u < c).unwrap_or(EVENT_KINDS.len() - 1);
        EVENT_KINDS[k]
    }
}

fn pick<'a>(r: &mut Rng, items: &[&'a str]) -> &'a str {
    items[r.random_range(0..items.len())]
}

fn count(r: &mut Rng, g: &Geometric) -> u32 {
    1 + g.sample(r).min(999) as u32
}

fn system_line(r: &mut Rng, tick: TickTime) -> String {
    let stamp = from_ticks(tick).journal_format();
    match r.random_range(0..4) {
        0 => format!(
            "'C {stamp}; 0:< ::{}:: Delta VM: Avail {} -> {} MB, Used +{} => {} MB",
            r.random_range(100..200),
            r.random_range(-40..40),
            r.random_range(100_000_000..140_000_000u64),
            r.random_range(0..30),
            r.random_range(300..900)
        ),
        1 => format!("'H {stamp}; 0:< DBG_INFO: Idle loop processed, count {}", r.random_range(1..500)),
        2 => format!("' 0:< GUI Resource Usage GDI: Avail {}, Used {}", r.random_range(9000..10000), r.random_range(100..900)),
        _ => format!("'C {stamp}; 0:< API_SUCCESS {{ Registered an external service }}"),
    }
}

/// Generates one designer's session files and ground truth.
pub fn gen_designer(id: &str, profile: &DesignerProfile, config: &GenConfig) -> Result<GeneratedDesigner, SynthError> {
    profile.validate()?;
    config.validate()?;
    let m = &config.mechanics;
    let rates = rates(profile, m);
    let sampler = Sampler::new(&rates, m);

    let mut noise_rng = rng::stream(profile.seed, 1);
    let noise = if config.noise_sd > 0.0 {
        Normal::new(0.0, config.noise_sd).expect("valid normal").sample(&mut noise_rng)
    } else {
        0.0
    };
    let total = true_score(profile, noise, m);
    let assessment = quality::assessment_for_total(total).expect("true score lies in the rubric range");
    let parts = quality::score(&assessment).expect("decomposition is valid");

    let mut r = rng::stream(profile.seed, 2);
    let (s0, s1) = config.sessions_per_designer;
    let (e0, e1) = config.events_per_designer;
    let n_sessions = r.random_range(s0..=s1);
    let n_events = r.random_range(e0..=e1);
    let shares: Vec<f64> = (0..n_sessions).map(|_| r.random_range(0.5..1.5)).collect();
    let share_total: f64 = shares.iter().sum();
    let mut lengths: Vec<usize> = shares
        .iter()
        .map(|s| ((s / share_total * n_events as f64) as usize).max(1))
        .collect();
    let assigned: usize = lengths.iter().sum();
    if assigned < n_events {
        lengths[0] += n_events - assigned;
    } else {
        let mut excess = assigned - n_events;
        for l in lengths.iter_mut() {
            let cut = excess.min(*l - 1);
            *l -= cut;
            excess -= cut;
        }
    }

    let epoch = to_ticks(&CivilDateTime::new(2023, 2, 6, 8, 0, 0, 0)).expect("valid start date").0;
    let mut tick = epoch + r.random_range(0..7 * MS_PER_DAY);
    let mut sessions = Vec::with_capacity(n_sessions);
    for (k, &len) in lengths.iter().enumerate() {
        if k > 0 {
            tick += m.session_gap_base_ms
                + (m.session_gap_disengaged_ms as f64 * (1.0 - profile.engagement)) as u64
                + r.random_range(0..=m.session_gap_jitter_ms);
        }
        let (journal, tracker, end) = gen_session(&mut r, &sampler, &rates, m, config, tick, len);
        tick = end;
        sessions.push(SessionFiles { index: k + 1, journal, tracker });
    }

    Ok(GeneratedDesigner {
        truth: DesignerTruth {
            designer_id: id.into(),
            profile: *profile,
            noise,
            true_score: total,
            assessment,
            parts,
            sessions: n_sessions,
            events: n_events,
            rates,
        },
        sessions,
    })
}

fn gen_session(
    r: &mut Rng,
    s: &Sampler,
    rates: &DesignerRates,
    m: &Mechanics,
    config: &GenConfig,
    start: u64,
    len: usize,
) -> (String, String, u64) {
    let mut journal = String::with_capacity(len * 110);
    journal.push_str("'Build: 2023.0 20230101_1515(x64)\nDim Jrn\nSet Jrn = CrsJournalScript\n");
    let mut tracker = Vec::with_capacity(len / 2);
    let mut tick = start;
    for e in 0..len {
        if e > 0 {
            let u: f64 = r.random();
            let gap = if u < rates.idle_prob {
                if r.random::<f64>() < m.idle_long_share {
                    5 * MS_PER_MINUTE + s.long_extra.sample(r) as u64
                } else {
                    r.random_range(MS_PER_MINUTE..5 * MS_PER_MINUTE)
                }
            } else if u < rates.idle_prob + m.short_pause_prob {
                r.random_range(MS_PER_MINUTE..2 * MS_PER_MINUTE)
            } else {
                (s.gap.sample(r) as u64).clamp(50, m.gap_cap_ms)
            };
            tick += gap;
        }
        let t = TickTime(tick);
        let kind = s.kind(r.random());
        let journal_line = match kind {
            SynthEvent::KeyPress => {
                let key = pick(r, &KEYS);
                tracker.push(TrackerRecord { tick: t, kind: TrackerKind::KeyPress, count: 1, payload: key.into() });
                None
            }
            SynthEvent::Added | SynthEvent::Modified | SynthEvent::Deleted => {
                let (tk, g) = match kind {
                    SynthEvent::Added => (TrackerKind::ElementsAdded, &s.added),
                    SynthEvent::Modified => (TrackerKind::ElementsModified, &s.modified),
                    _ => (TrackerKind::ElementsDeleted, &s.deleted),
                };
                let n = count(r, g);
                let payload = pick(r, &ELEMENTS);
                tracker.push(TrackerRecord { tick: t, kind: tk, count: n, payload: payload.into() });
                None
            }
            SynthEvent::Command => {
                let u: f64 = r.random();
                let method = if u < rates.command_accel {
                    "AccelKey"
                } else if u < rates.command_accel + rates.command_ribbon {
                    "Ribbon"
                } else {
                    "Internal"
                };
                let detail = if r.random::<f64>() < rates.undo_share { pick(r, &UNDO_COMMANDS) } else { pick(r, &COMMANDS) };
                Some(format_journal_line(t, "Jrn.Command", Some(method), &[detail]))
            }
            SynthEvent::PushButton => {
                let (d, b) = (pick(r, &DIALOGS), pick(r, &BUTTONS));
                Some(format_journal_line(t, "Jrn.PushButton", None, &[d, b]))
            }
            SynthEvent::TransactionOk => Some(format_journal_line(t, "Jrn.Transaction", None, &[TRANSACTION_SUCCESSFUL])),
            SynthEvent::TransactionOther => Some(format_journal_line(t, "Jrn.Transaction", None, &["Transaction Rolled Back"])),
            SynthEvent::OtherJrn => Some(format_journal_line(t, "Jrn.Data", None, &["Selection action", "Clear"])),
        };
        if let Some(line) = journal_line {
            let sys = config.system_lines_per_record;
            let extra = sys as usize + usize::from(r.random::<f64>() < sys - libm::floor(sys));
            for _ in 0..extra {
                journal.push_str(&system_line(r, t));
                journal.push('\n');
            }
            journal.push_str(&line);
            journal.push('\n');
        }
    }
    (journal, write_tracker(&tracker), tick)
}

/// Profiles and ids for every designer of a corpus.
pub fn corpus_plan(config: &GenConfig, master_seed: u64) -> Vec<(String, DesignerProfile)> {
    (0..config.n_designers).map(|i| (designer_id(i), draw_profile(master_seed, i))).collect()
}

/// Generates the whole corpus in memory, designers in parallel.
pub fn gen_corpus(config: &GenConfig, master_seed: u64) -> Result<(Vec<GeneratedDesigner>, GroundTruth), SynthError> {
    config.validate()?;
    let plan = corpus_plan(config, master_seed);
    let designers = par::map_range(plan.len(), |i| gen_designer(&plan[i].0, &plan[i].1, config))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let truth = GroundTruth {
        generator_version: GENERATOR_VERSION,
        master_seed,
        config: config.clone(),
        designers: designers.iter().map(|d| d.truth.clone()).collect(),
    };
    Ok((designers, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(skill: f64, stab: f64, eng: f64) -> DesignerProfile {
        DesignerProfile { skill, intent_stability: stab, engagement: eng, seed: 42 }
    }

    #[test]
    fn calibrated_score_examples() {
        let m = Mechanics::default();
        assert_eq!(true_score(&profile(0.5, 0.5, 0.5), 0.0, &m), 71);
        assert_eq!(true_score(&profile(0.0, 0.0, 0.0), 0.0, &m), 44);
        assert_eq!(true_score(&profile(0.5, 0.5, 0.5), -100.0, &m), 38);
        assert_eq!(true_score(&profile(1.0, 1.0, 1.0), 100.0, &m), 94);
    }

    #[test]
    fn config_validation() {
        assert!(GenConfig::default().validate().is_ok());
        let mut c = GenConfig::small();
        c.noise_sd = -1.0;
        assert!(c.validate().is_err());
        let mut c = GenConfig::small();
        c.sessions_per_designer = (5, 4);
        assert!(c.validate().is_err());
        assert!(profile(1.2, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn rates_are_probabilities() {
        let r = rates(&profile(0.3, 0.6, 0.9), &Mechanics::default());
        assert!((r.event_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(r.command_ribbon > 0.0 && r.command_accel > 0.0);
        assert!((r.command_ribbon + r.command_accel + r.command_internal - 1.0).abs() < 1e-12);
    }

    #[test]
    fn session_lengths_sum_to_events() {
        let mut c = GenConfig::small();
        c.system_lines_per_record = 0.0;
        let d = gen_designer("D001", &profile(0.5, 0.5, 0.5), &c).unwrap();
        let journal_lines: usize = d.sessions.iter().map(|s| s.journal.lines().count() - 3).sum();
        let tracker_lines: usize = d.sessions.iter().map(|s| s.tracker.lines().count() - 1).sum();
        assert_eq!(journal_lines + tracker_lines, d.truth.events);
        assert_eq!(d.sessions.len(), d.truth.sessions);
    }
}
