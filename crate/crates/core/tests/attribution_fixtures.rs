mod common;

use breakscope::attribution::{
    combination_share_with, combo_shares, dedupe_breaks, match_policies, mix_vs_single, summarize_instruments, Action,
    Category, CategoryMap, PolicyEvent, Typology,
};
use breakscope::effects::BreakEstimate;
use breakscope::io;
use breakscope::panel::{Group, Pollutant, Sector};
use common::{financing_matches, fixture};

#[test]
fn financing_row_frequency_mean_and_typology() {
    let matches = financing_matches();
    assert_eq!(matches.len(), 13);
    let rows = summarize_instruments(&matches);
    let fin = rows.iter().find(|r| r.instrument == "Financing mechanism").unwrap();
    assert_eq!(fin.frequency, 13);
    assert!((fin.mean_effect - -0.2367).abs() < 5e-5, "{}", fin.mean_effect);
    assert_eq!((fin.n_developed, fin.n_developing), (4, 9));
    assert_eq!(fin.typology, Typology::DevelopingDominated);
    let top: Vec<String> = fin.cases.iter().map(|c| c.to_string()).collect();
    assert_eq!(top[0], "BGR.2011 (-32.9%) in industry");
    assert_eq!(top[1], "CHL.2014 (-32.4%) in buildings");
}

#[test]
fn financing_with_pricing_versus_alone() {
    let rows = mix_vs_single(&financing_matches());
    let fin = rows.iter().find(|r| r.instrument == "Financing mechanism").unwrap();
    assert_eq!(fin.n_alone, 4);
    assert_eq!(fin.n_mix_pricing, 4);
    assert_eq!(fin.n_mix, 9);
    assert_eq!(format!("{:.1}", 100.0 * fin.mean_alone.unwrap()), "-17.9");
    assert_eq!(format!("{:.1}", 100.0 * fin.mean_mix_pricing.unwrap()), "-28.0");
    let tax = rows.iter().find(|r| r.instrument == "Taxation").unwrap();
    assert_eq!(tax.n_mix, 4);
    assert_eq!(tax.mean_mix_pricing, None);
}

#[test]
fn events_outside_windows_do_not_match() {
    let matches = financing_matches();
    for m in &matches {
        for e in &m.events {
            assert!(e.year >= m.estimate.window_lo && e.year <= m.estimate.window_hi);
            assert_eq!(e.country, m.estimate.country_iso);
            assert_eq!(e.sector, m.estimate.series.sector);
        }
    }
    let usa = matches.iter().find(|m| m.estimate.country_iso == "USA").unwrap();
    assert_eq!(usa.events.len(), 1);
}

fn edge_break(ci: (i32, i32)) -> BreakEstimate {
    let mut b = io::read_breaks(&fixture("fin_breaks.csv"), &fixture("fin_groups.csv"))
        .unwrap()
        .remove(0);
    b.year = ci.0;
    b.ci_lo = ci.0;
    b.ci_hi = ci.1;
    b.window_lo = ci.0 - 2;
    b.window_hi = ci.1 + 2;
    b
}

#[test]
fn window_edges_plus_minus_two() {
    let map = CategoryMap::default();
    let b = edge_break((2014, 2014));
    let ev = |year| {
        PolicyEvent::new(
            "BGR",
            year,
            Sector::Industry,
            "Carbon tax",
            Action::Adoption,
            &map,
            false,
        )
        .unwrap()
    };
    for (year, hit) in [(2011, false), (2012, true), (2016, true), (2017, false)] {
        let m = match_policies(std::slice::from_ref(&b), &[ev(year)]);
        assert_eq!(m[0].is_matched(), hit, "event in {year}");
    }
    // a wider timing interval moves both edges
    let wide = edge_break((2013, 2015));
    assert!(match_policies(&[wide.clone()], &[ev(2011)])[0].is_matched());
    assert!(match_policies(&[wide], &[ev(2017)])[0].is_matched());
}

#[test]
fn window_matching_is_shift_invariant() {
    let map = CategoryMap::default();
    for shift in [-7, 3, 11] {
        let b = edge_break((2014 + shift, 2015 + shift));
        for year in 2008..2022 {
            let e = PolicyEvent::new(
                "BGR",
                year + shift,
                Sector::Industry,
                "Fuel tax",
                Action::Adoption,
                &map,
                false,
            )
            .unwrap();
            let base = PolicyEvent { year, ..e.clone() };
            let plain = match_policies(&[edge_break((2014, 2015))], &[base])[0].is_matched();
            assert_eq!(match_policies(std::slice::from_ref(&b), &[e])[0].is_matched(), plain);
        }
    }
}

#[test]
fn dedup_is_idempotent_and_keeps_larger_effect() {
    let mut a = edge_break((2008, 2012));
    a.effect_pct = -30.0;
    let mut b = edge_break((2009, 2011));
    b.effect_pct = -10.0;
    let c = edge_break((2016, 2016));
    let key = |v: &[BreakEstimate]| -> Vec<(String, i32, i32)> {
        v.iter().map(|e| (e.country_iso.clone(), e.ci_lo, e.ci_hi)).collect()
    };
    let once = dedupe_breaks(&[a.clone(), b, c.clone()]);
    assert_eq!(key(&once), key(&[a, c]));
    assert_eq!(key(&dedupe_breaks(&once)), key(&once));
    let fixture = io::read_breaks(&fixture("fin_breaks.csv"), &fixture("fin_groups.csv")).unwrap();
    let d = dedupe_breaks(&fixture);
    assert_eq!(d.len(), fixture.len());
    assert_eq!(key(&dedupe_breaks(&d)), key(&d));
}

#[test]
fn developing_transport_pricing_combinations_share() {
    let map = CategoryMap::default();
    let base = edge_break((2010, 2010));
    let isos = ["BRA", "IND", "MEX", "IDN", "COL"];
    let mut breaks = Vec::new();
    let mut events = Vec::new();
    for (i, iso) in isos.iter().enumerate() {
        let mut b = base.clone();
        b.country_iso = iso.to_string();
        b.group = Group::Developing;
        b.series.sector = Sector::Transport;
        breaks.push(b);
        let ev =
            |name: &str| PolicyEvent::new(iso, 2011, Sector::Transport, name, Action::Adoption, &map, false).unwrap();
        events.push(ev("Public expenditure for rail"));
        if i < 3 {
            events.push(ev("Fuel tax"));
        }
    }
    let shares = combo_shares(&match_policies(&breaks, &events));
    let s = combination_share_with(
        &shares,
        Pollutant::Nox,
        Sector::Transport,
        Group::Developing,
        Category::Pricing,
    );
    assert!((s - 0.6).abs() < 1e-12);
    assert!((shares.iter().map(|c| c.share).sum::<f64>() - 1.0).abs() < 1e-12);
}
