use super::record::{LogError, LogWriter};
use super::{query, AuthFailure, ChoiceRecord, Respondent, RetryPolicy};
use crate::render::{render_prompt_with, PhraseTable, RenderMode};
use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

#[derive(Debug, Clone)]
pub struct CampaignOptions {
    pub mode: RenderMode,
    pub concurrency: usize,
    pub retry: RetryPolicy,
    pub phrases: PhraseTable,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self {
            mode: RenderMode::ChoiceOnly,
            concurrency: 4,
            retry: RetryPolicy::default(),
            phrases: PhraseTable::default(),
        }
    }
}

/// `requested` counts scenarios queried in this run; `skipped` were
/// already in the log.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CampaignSummary {
    pub requested: usize,
    pub completed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error("deck is empty")]
    EmptyDeck,
    #[error("concurrency must be at least 1")]
    ZeroConcurrency,
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("{source} (campaign stopped after {} records)", .partial.completed + .partial.failed)]
    Auth {
        source: AuthFailure,
        partial: CampaignSummary,
    },
}

/// Queries every deck scenario missing from `out_log` and appends one record
/// per scenario. At most `concurrency` queries are in flight; a single
/// writer appends whole lines, so an interrupted run leaves a valid log.
pub fn run_campaign(
    respondent: &dyn Respondent,
    deck: &[Scenario],
    out_log: &Path,
    opts: &CampaignOptions,
) -> Result<CampaignSummary, CampaignError> {
    if deck.is_empty() {
        return Err(CampaignError::EmptyDeck);
    }
    if opts.concurrency == 0 {
        return Err(CampaignError::ZeroConcurrency);
    }
    let (mut writer, seen) = LogWriter::open_resumable(out_log)?;
    let mut queued = HashSet::new();
    let pending: Vec<&Scenario> = deck
        .iter()
        .filter(|s| !seen.contains(&s.id) && queued.insert(s.id.as_str()))
        .collect();
    let mut summary = CampaignSummary {
        skipped: deck.len() - pending.len(),
        ..Default::default()
    };

    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let mut failure: Option<CampaignError> = None;

    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Result<ChoiceRecord, AuthFailure>>();
        for _ in 0..opts.concurrency.min(pending.len()) {
            let tx = tx.clone();
            let (next, stop, pending) = (&next, &stop, &pending);
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(s) = pending.get(i) else { break };
                let prompt = render_prompt_with(s, opts.mode, &opts.phrases);
                let outcome = query(respondent, s, &prompt, &opts.retry);
                if outcome.is_err() {
                    stop.store(true, Ordering::SeqCst);
                }
                if tx.send(outcome).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        for outcome in rx {
            if failure.is_some() {
                continue;
            }
            match outcome {
                Ok(record) => match writer.append(&record) {
                    Ok(()) if record.is_transport_failure() => summary.failed += 1,
                    Ok(()) => summary.completed += 1,
                    Err(e) => {
                        stop.store(true, Ordering::SeqCst);
                        failure = Some(e.into());
                    }
                },
                Err(source) => {
                    stop.store(true, Ordering::SeqCst);
                    failure = Some(CampaignError::Auth {
                        source,
                        partial: summary,
                    });
                }
            }
        }
    });

    if let Some(e) = failure {
        return Err(e);
    }
    summary.requested = summary.completed + summary.failed;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapters::{
        read_records, AttemptError, PolicySpec, RespondentSpec, SyntheticRespondent,
    };
    use crate::render::PromptText;
    use crate::scenario::{generate_deck, GenerationConfig};
    use std::sync::atomic::AtomicUsize;
    use std::time::Duration;

    fn deck(n: usize) -> Vec<Scenario> {
        generate_deck(&GenerationConfig {
            count: n,
            seed: 99,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn synthetic_campaign_covers_deck_once() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("responses.jsonl");
        let d = deck(100);
        let r =
            SyntheticRespondent::new(&RespondentSpec::synthetic("coin", PolicySpec::coin_flip(3)));
        let opts = CampaignOptions {
            concurrency: 8,
            ..Default::default()
        };
        let s = run_campaign(&r, &d, &log, &opts).unwrap();
        assert_eq!(
            (s.requested, s.completed, s.failed, s.skipped),
            (100, 100, 0, 0)
        );
        let recs = read_records(&log).unwrap();
        assert_eq!(recs.len(), 100);
        let ids: HashSet<_> = recs.iter().map(|r| r.scenario_id.clone()).collect();
        assert_eq!(ids.len(), 100);

        let again = run_campaign(&r, &d, &log, &opts).unwrap();
        assert_eq!((again.requested, again.skipped), (0, 100));
        assert_eq!(read_records(&log).unwrap().len(), 100);
    }

    struct Gauge {
        in_flight: AtomicUsize,
        peak: AtomicUsize,
    }

    impl Respondent for Gauge {
        fn model_name(&self) -> &str {
            "gauge"
        }

        fn respond(&self, _: &Scenario, _: &PromptText) -> Result<String, AttemptError> {
            let now = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
            self.peak.fetch_max(now, Ordering::SeqCst);
            std::thread::sleep(Duration::from_millis(5));
            self.in_flight.fetch_sub(1, Ordering::SeqCst);
            Ok("Case 1".into())
        }
    }

    #[test]
    fn in_flight_bounded_by_concurrency() {
        let dir = tempfile::tempdir().unwrap();
        let g = Gauge {
            in_flight: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        };
        let opts = CampaignOptions {
            concurrency: 3,
            ..Default::default()
        };
        run_campaign(&g, &deck(40), &dir.path().join("l.jsonl"), &opts).unwrap();
        let peak = g.peak.load(Ordering::SeqCst);
        assert!((1..=3).contains(&peak), "{peak}");
    }

    struct Locked;

    impl Respondent for Locked {
        fn model_name(&self) -> &str {
            "locked"
        }

        fn respond(&self, _: &Scenario, _: &PromptText) -> Result<String, AttemptError> {
            Err(AttemptError::Auth("HTTP 401".into()))
        }
    }

    #[test]
    fn auth_failure_stops_campaign_and_keeps_log_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("l.jsonl");
        let err = run_campaign(&Locked, &deck(10), &log, &CampaignOptions::default()).unwrap_err();
        assert!(matches!(err, CampaignError::Auth { .. }));
        assert!(read_records(&log).unwrap().is_empty());
    }

    #[test]
    fn empty_deck_and_zero_concurrency_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("l.jsonl");
        assert!(matches!(
            run_campaign(&Locked, &[], &log, &CampaignOptions::default()),
            Err(CampaignError::EmptyDeck)
        ));
        let opts = CampaignOptions {
            concurrency: 0,
            ..Default::default()
        };
        assert!(matches!(
            run_campaign(&Locked, &deck(1), &log, &opts),
            Err(CampaignError::ZeroConcurrency)
        ));
    }
}
