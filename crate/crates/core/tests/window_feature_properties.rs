use bimq_core::features::{extract_features, FeatureIndex, WindowStats, EFFECT_T, FEATURE_COUNT, IDLE_GT5_T, INDICATORS};
use bimq_core::ingest::CommandMethod;
use bimq_core::session::{concat_sessions, integrate, EventCategory, SessionEvent, Source};
use bimq_core::ticks::TickTime;
use bimq_core::windows::{make_windows, WindowConfig};
use proptest::prelude::*;

fn brute_force_starts(len: usize, length: usize, step: usize) -> Vec<usize> {
    let mut starts = Vec::new();
    let mut start = 0;
    while start + length <= len {
        starts.push(start);
        start += step;
    }
    starts
}

fn lns() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=100_000)
        .prop_flat_map(|l| (Just(l), 1..=l))
        .prop_flat_map(|(l, n)| (Just(l), Just(n), prop_oneof![1..=n.min(50), 1..=n]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn window_count_matches_enumeration((len, length, step) in lns()) {
        let cfg = WindowConfig::new(length, step).unwrap();
        let windows = make_windows(len, &cfg);
        let starts: Vec<usize> = windows.iter().map(|w| w.start).collect();
        prop_assert_eq!(&starts, &brute_force_starts(len, length, step));
        prop_assert_eq!(windows.len(), (len - length) / step + 1);
        prop_assert_eq!(cfg.count_for(len), windows.len());
        for w in &windows {
            prop_assert_eq!(w.len(), length);
            prop_assert!(w.end <= len && !w.short);
        }
        if let [a, b, ..] = windows[..] {
            let shared = (b.start..b.end).filter(|i| (a.start..a.end).contains(i)).count();
            prop_assert_eq!(shared, cfg.overlap());
        }
        for pair in windows.windows(2) {
            prop_assert_eq!(pair[0].end.min(pair[1].end) - pair[1].start.min(pair[0].end), cfg.overlap());
        }
        // union is the prefix [0, s·(count−1) + N) and the dropped tail is shorter than s
        let covered = step * (windows.len() - 1) + length;
        prop_assert_eq!(windows.last().unwrap().end, covered);
        prop_assert!(len - covered < step);
    }
}

#[test]
fn short_sequences() {
    let cfg = WindowConfig::new(100, 10).unwrap();
    let w = make_windows(40, &cfg);
    assert_eq!(w.len(), 1);
    assert!(w[0].short && w[0].end == 40);
    assert!(make_windows(40, &cfg.with_keep_short(false)).is_empty());
    assert!(make_windows(0, &cfg).is_empty());
}

fn category() -> impl Strategy<Value = EventCategory> {
    let method = prop_oneof![
        Just(CommandMethod::Ribbon),
        Just(CommandMethod::AccelKey),
        Just(CommandMethod::Internal),
        Just(CommandMethod::None)
    ];
    prop_oneof![
        (method, any::<bool>()).prop_map(|(method, undo)| EventCategory::Command { method, undo }),
        Just(EventCategory::PushButton),
        Just(EventCategory::TransactionSuccess),
        Just(EventCategory::OtherTransaction),
        (1u32..20).prop_map(EventCategory::ElementsAdded),
        (1u32..20).prop_map(EventCategory::ElementsDeleted),
        (1u32..20).prop_map(EventCategory::ElementsModified),
        Just(EventCategory::KeyPress),
        Just(EventCategory::OtherJrn),
    ]
}

fn gap() -> impl Strategy<Value = u64> {
    prop_oneof![
        4 => 0u64..60_000,
        1 => 60_000u64..120_000,
        1 => 120_000u64..300_000,
        1 => 300_000u64..2_000_000,
        1 => Just(0u64),
        1 => prop_oneof![Just(60_000u64), Just(120_000), Just(300_000)],
    ]
}

fn events(max: usize) -> impl Strategy<Value = Vec<SessionEvent>> {
    prop::collection::vec((gap(), category()), 1..max).prop_map(|raw| {
        let mut tick = 63_800_000_000_000u64;
        raw.into_iter()
            .map(|(g, category)| {
                tick += g;
                SessionEvent { tick: TickTime(tick), category }
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn feature_identities(ev in events(400)) {
        let v = extract_features(&ev).unwrap();
        prop_assert!(v.0.iter().all(|x| x.is_finite()));
        let stats = WindowStats::of_events(&ev);
        if stats.span_ms > 0 {
            prop_assert!((v.0[EFFECT_T] + v.0[IDLE_GT5_T] - 1.0).abs() < 1e-12);
        }
        prop_assert!(v.get("idle1_2_t").unwrap() + v.get("idle2_5_t").unwrap() + v.0[IDLE_GT5_T] <= 1.0 + 1e-12);
        let commands = ev.iter().filter(|e| matches!(e.category, EventCategory::Command { .. })).count() as f64;
        let internal = ev
            .iter()
            .filter(|e| matches!(e.category, EventCategory::Command { method: CommandMethod::Internal | CommandMethod::None, .. }))
            .count() as f64;
        let l = ev.len() as f64;
        let sum = v.get("ribbon_d").unwrap() + v.get("accelkey_d").unwrap() + internal / l;
        prop_assert!((sum - v.get("command_d").unwrap()).abs() < 1e-12);
        prop_assert!((v.get("command_d").unwrap() - commands / l).abs() < 1e-12);
    }

    #[test]
    fn index_agrees_with_direct_extraction(ev in events(300), a in 0usize..300, b in 0usize..300) {
        let index = FeatureIndex::new(&ev);
        let (start, end) = (a.min(b) % ev.len(), (a.max(b) % ev.len()) + 1);
        prop_assume!(start < end);
        prop_assert_eq!(index.stats(start, end).unwrap(), WindowStats::of_events(&ev[start..end]));
    }

    #[test]
    fn doubling_keeps_indicator_densities(ev in events(200)) {
        let doubled: Vec<SessionEvent> = ev.iter().flat_map(|e| [*e, *e]).collect();
        let a = extract_features(&ev).unwrap();
        let b = extract_features(&doubled).unwrap();
        // indicator densities only; a duplicate spends zero time so it is never a pause
        for k in 0..INDICATORS {
            prop_assert!((a.0[k] - b.0[k]).abs() < 1e-12, "feature {}", k);
        }
        for k in INDICATORS + 3..FEATURE_COUNT {
            prop_assert!((a.0[k] - b.0[k]).abs() < 1e-12, "time feature {}", k);
        }
    }

    #[test]
    fn merge_is_a_stable_permutation(ev in events(200)) {
        let (journal_ev, tracker_ev): (Vec<_>, Vec<_>) =
            ev.iter().partition(|e| e.source() == Source::Journal);
        // rebuild both sources through records so the merge sees real inputs
        let journal: Vec<_> = journal_ev.iter().map(journal_record).collect();
        let tracker: Vec<_> = tracker_ev.iter().filter_map(tracker_record).collect();
        prop_assume!(!journal.is_empty() || !tracker.is_empty());
        let session = integrate("1", "D001", &journal, &tracker).unwrap();
        prop_assert_eq!(session.events.len(), journal.len() + tracker.len());
        prop_assert!(session.events.windows(2).all(|w| w[0].tick <= w[1].tick));
        let from = |src: Source| session.events.iter().filter(|e| e.source() == src).copied().collect::<Vec<_>>();
        prop_assert_eq!(from(Source::Journal), journal_ev);
        prop_assert_eq!(from(Source::Tracker), tracker_ev);
        let single = concat_sessions(std::slice::from_ref(&session)).unwrap();
        prop_assert_eq!(single.events, session.events);
        prop_assert!(single.boundaries.is_empty());
    }
}

fn journal_record(e: &SessionEvent) -> bimq_core::ingest::JournalRecord {
    use bimq_core::ingest::{JournalKind, JournalRecord, TRANSACTION_SUCCESSFUL};
    let (kind, method, details) = match e.category {
        EventCategory::Command { method, undo } => {
            (JournalKind::Command, method, vec![if undo { "Undo".to_string() } else { "Wall".to_string() }])
        }
        EventCategory::PushButton => (JournalKind::PushButton, CommandMethod::None, vec!["OK".into()]),
        EventCategory::TransactionSuccess => (JournalKind::Transaction, CommandMethod::None, vec![TRANSACTION_SUCCESSFUL.into()]),
        EventCategory::OtherTransaction => (JournalKind::Transaction, CommandMethod::None, vec!["Other".into()]),
        _ => (JournalKind::OtherJrn, CommandMethod::None, vec![]),
    };
    JournalRecord { tick: e.tick, kind, method, details }
}

fn tracker_record(e: &SessionEvent) -> Option<bimq_core::ingest::TrackerRecord> {
    use bimq_core::ingest::{TrackerKind, TrackerRecord};
    let (kind, count) = match e.category {
        EventCategory::ElementsAdded(n) => (TrackerKind::ElementsAdded, n),
        EventCategory::ElementsDeleted(n) => (TrackerKind::ElementsDeleted, n),
        EventCategory::ElementsModified(n) => (TrackerKind::ElementsModified, n),
        EventCategory::KeyPress => (TrackerKind::KeyPress, 1),
        _ => return None,
    };
    Some(TrackerRecord { tick: e.tick, kind, count, payload: String::new() })
}
