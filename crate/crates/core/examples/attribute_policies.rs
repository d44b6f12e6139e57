//! Policy attribution on hand-built breaks: dedup, window matching, the
//! instrument summary and the single-vs-mix comparison.
//!
//!   cargo run --example attribute_policies

use breakscope::attribution::{
    combo_shares, dedupe_breaks, match_policies, mix_vs_single, summarize_instruments, Action, CategoryMap, PolicyEvent,
};
use breakscope::effects::BreakEstimate;
use breakscope::panel::{Group, Pollutant, Sector, SeriesKey};

fn brk(iso: &str, group: Group, sector: Sector, year: i32, ci: (i32, i32), effect: f64) -> BreakEstimate {
    let tau = (1.0 + effect).ln();
    BreakEstimate {
        series: SeriesKey::new(Pollutant::Nox, sector),
        country: 0,
        country_iso: iso.into(),
        group,
        eu_member: iso == "DEU",
        year,
        tau_hat: tau,
        se: 0.03,
        clustered_se: None,
        p_value: 1e-4,
        significant: true,
        effect_pct: 100.0 * effect,
        ci_lo: ci.0,
        ci_hi: ci.1,
        window_lo: ci.0 - 2,
        window_hi: ci.1 + 2,
        weak_timing: false,
        counterfactual: Vec::new(),
        cum_reduction: 0.0,
        cum_lo: 0.0,
        cum_hi: 0.0,
    }
}

fn main() -> breakscope::Result<()> {
    use Group::*;
    use Sector::*;
    let breaks = vec![
        brk("CHL", Developing, Buildings, 2014, (2013, 2014), -0.324),
        // nested inside the CHL interval above: removed by dedup
        brk("CHL", Developing, Buildings, 2014, (2014, 2014), -0.05),
        brk("DEU", Developed, Electricity, 2008, (2007, 2009), -0.21),
        brk("IND", Developing, Transport, 2016, (2016, 2017), -0.18),
        brk("USA", Developed, Industry, 2003, (2003, 2003), -0.12),
    ];
    let map = CategoryMap::default();
    let events = vec![
        PolicyEvent::new(
            "CHL",
            2012,
            Buildings,
            "Financing mechanism",
            Action::Adoption,
            &map,
            false,
        )?,
        PolicyEvent::new(
            "CHL",
            2015,
            Buildings,
            "Performance standard",
            Action::Tightening,
            &map,
            false,
        )?,
        PolicyEvent::new(
            "EU",
            2005,
            Electricity,
            "Emission trading scheme",
            Action::Adoption,
            &map,
            true,
        )?,
        PolicyEvent::new(
            "DEU",
            2010,
            Electricity,
            "Financing mechanism",
            Action::Adoption,
            &map,
            false,
        )?,
        PolicyEvent::new("IND", 2019, Transport, "Fuel tax", Action::Tightening, &map, false)?,
        // outside the USA window (2001-2005)
        PolicyEvent::new(
            "USA",
            2006,
            Industry,
            "Performance standard",
            Action::Adoption,
            &map,
            false,
        )?,
    ];

    let kept = dedupe_breaks(&breaks);
    println!("{} breaks, {} after dedup", breaks.len(), kept.len());
    let matches = match_policies(&kept, &events);
    for m in &matches {
        let names: Vec<String> = m.instruments().into_iter().collect();
        println!(
            "  {}.{} {:<12} {:<12} {}",
            m.estimate.country_iso,
            m.estimate.year,
            m.estimate.series.sector,
            m.mix.as_str(),
            names.join(" + ")
        );
    }

    println!("\ninstrument summary:");
    for row in summarize_instruments(&matches) {
        let cases: Vec<String> = row.cases.iter().map(|c| c.to_string()).collect();
        println!(
            "  {:<24} n={} mean={:+.3} {:<20} {}",
            row.instrument,
            row.frequency,
            row.mean_effect,
            row.typology.as_str(),
            cases.join("; ")
        );
    }
    println!("\nalone vs in a mix:");
    for r in mix_vs_single(&matches) {
        println!(
            "  {:<24} alone {:?} (n={})  mix {:?} (n={})",
            r.instrument, r.mean_alone, r.n_alone, r.mean_mix, r.n_mix
        );
    }
    println!("\ncategory combinations:");
    for c in combo_shares(&matches) {
        println!(
            "  {} {} {}: {} {:.0}%",
            c.pollutant,
            c.sector,
            c.group,
            c.label(),
            100.0 * c.share
        );
    }
    Ok(())
}
