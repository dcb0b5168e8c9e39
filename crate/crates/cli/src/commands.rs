use std::borrow::Cow;
use std::fs;
use std::path::Path;
use std::time::Instant;

use finrot::analysis::{gibbs_sweep, overshoot_stats, write_profile_csv, OvershootReport, PatternKind};
use finrot::image_model::io::{
    read_any, write_mono_csv, write_mono_picture, write_picture, write_picture_csv, Picture,
};
use finrot::image_model::{
    clip_mono, clip_rgb, normalize_mono, normalize_rgb_joint, normalize_rgb_per_channel,
    pattern_delta, pattern_letter_r, pattern_step, rotate_mono, rotate_rgb,
};
use finrot::kernel::{
    build_kernel_cartesian, save_kernel, CacheOutcome, CartesianBuilder, DiskCache, KernelSource,
    RotationKernel,
};
use finrot::{OscillatorRep, WavefunctionTable};

use crate::{
    AnalyzeArgs, DisplayMode, Failure, KernelArgs, PatternArgs, PatternChoice, RotateArgs,
    SweepPattern,
};

type Outcome = Result<(), Failure>;

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn fetch_kernel(cache: &DiskCache, rep: OscillatorRep, theta: f64) -> finrot::Result<RotationKernel> {
    let path = cache.path_for(rep, theta);
    let (kernel, outcome) = cache.fetch(rep, theta)?;
    match outcome {
        CacheOutcome::Hit => eprintln!("kernel: reused {}", path.display()),
        CacheOutcome::Built => eprintln!("kernel: built and stored {}", path.display()),
        CacheOutcome::Rebuilt { reason } => eprintln!(
            "warning: cached kernel {} unusable ({reason}); rebuilt",
            path.display()
        ),
    }
    Ok(kernel)
}

/// Disk cache that reports hits, builds and repairs on stderr.
struct LoggedCache(DiskCache);

impl KernelSource for LoggedCache {
    fn kernel(&self, rep: OscillatorRep, theta: f64) -> finrot::Result<Cow<'_, RotationKernel>> {
        fetch_kernel(&self.0, rep, theta).map(Cow::Owned)
    }
}

pub fn rotate(args: &RotateArgs) -> Outcome {
    let theta = args.angle.radians().map_err(Failure::usage)?;
    if args.mode == DisplayMode::Raw && !is_csv(&args.output) {
        return Err(Failure::usage("--mode raw writes data values and needs a .csv output"));
    }
    let picture = read_any(&args.input)?;
    let rep = OscillatorRep::from_side(picture.side())?;
    let kernel = if args.no_cache {
        CartesianBuilder.kernel(rep, theta)?.into_owned()
    } else {
        LoggedCache(DiskCache::new(args.cache.dir())).kernel(rep, theta)?.into_owned()
    };

    let rotated = match &picture {
        Picture::Mono(m) => Picture::Mono(rotate_mono(m, theta, &kernel)?),
        Picture::Rgb(c) => Picture::Rgb(rotate_rgb(c, theta, &kernel)?),
    };
    if let Some(raw) = &args.raw_csv {
        write_picture_csv(&rotated, raw)?;
    }

    let shown = match (args.mode, rotated) {
        (DisplayMode::Raw, data) => data,
        (DisplayMode::Clip, Picture::Mono(m)) => Picture::Mono(clip_mono(&m)),
        (DisplayMode::Clip, Picture::Rgb(c)) => Picture::Rgb(clip_rgb(&c)),
        (_, Picture::Mono(m)) => {
            let (out, st) = normalize_mono(&m);
            println!("normalization: s={:?} S={:?} map=[{:?},{:?}]", st.min, st.max, st.lower(), st.upper());
            Picture::Mono(out)
        }
        (mode, Picture::Rgb(c)) => {
            let (out, report) = if mode == DisplayMode::NormalizePerChannel {
                normalize_rgb_per_channel(&c)
            } else {
                normalize_rgb_joint(&c)
            };
            println!("{report}");
            Picture::Rgb(out)
        }
    };
    if is_csv(&args.output) {
        write_picture_csv(&shown, &args.output)?;
    } else {
        write_picture(&shown, &args.output)?;
    }
    println!(
        "rotated {} by {theta:?} rad -> {}",
        args.input.display(),
        args.output.display()
    );
    Ok(())
}

pub fn kernel(args: &KernelArgs) -> Outcome {
    let theta = args.angle.radians().map_err(Failure::usage)?;
    let rep = OscillatorRep::from_side(args.side)?;
    let start = Instant::now();
    let kernel = build_kernel_cartesian(rep, theta, &WavefunctionTable::new(rep))?;
    let elapsed = start.elapsed();
    let path = match &args.output {
        Some(p) => p.clone(),
        None => {
            let cache = DiskCache::new(args.cache.dir());
            fs::create_dir_all(cache.dir()).map_err(finrot::Error::from)?;
            cache.path_for(rep, theta)
        }
    };
    let checksum = save_kernel(&kernel, &path)?;
    let bytes = fs::metadata(&path).map_err(finrot::Error::from)?.len();
    println!("kernel N={} theta={theta:?}", rep.side());
    println!("build wall time: {:.3} s", elapsed.as_secs_f64());
    println!("threads: {}", rayon::current_num_threads());
    println!("checksum: {checksum:016x}");
    println!("file: {} ({bytes} bytes)", path.display());
    Ok(())
}

pub fn pattern(args: &PatternArgs) -> Outcome {
    if is_csv(&args.output) {
        return Err(Failure::usage("give a picture path; the CSV is written beside it"));
    }
    let image = match args.kind {
        PatternChoice::Delta => pattern_delta(args.side)?,
        PatternChoice::Step => pattern_step(args.side)?,
        PatternChoice::LetterR => pattern_letter_r(args.side)?,
    };
    let csv = args.output.with_extension("csv");
    write_mono_picture(&image, &args.output)?;
    write_mono_csv(&image, &csv)?;
    println!("wrote {} and {}", args.output.display(), csv.display());
    Ok(())
}

fn print_report(label: &str, r: &OvershootReport) {
    println!(
        "{label}: s={:?} at ({},{}), S={:?} at ({},{}); undershoot |s|={:?}, overshoot S-1={:?}",
        r.min(),
        r.global.min.ix,
        r.global.min.iy,
        r.max(),
        r.global.max.ix,
        r.global.max.iy,
        r.undershoot(),
        r.overshoot()
    );
    let interior = r
        .interior
        .map(|e| format!("{:?}/{:?}", e.min.value, e.max.value))
        .unwrap_or_else(|| "none".into());
    println!(
        "{label}: border min/max {:?}/{:?}, interior min/max {interior}",
        r.border.min.value, r.border.max.value
    );
}

pub fn analyze(args: &AnalyzeArgs) -> Outcome {
    if let Some(input) = &args.input {
        return analyze_image(input, args.profile.as_deref());
    }
    let Some(pattern) = args.pattern else {
        return Err(Failure::usage("give either --input or --pattern with --ns and --angle"));
    };
    let angle = args.angle.as_deref().unwrap_or_default();
    let unit = if args.degrees { crate::angle::Unit::Degrees } else { crate::angle::Unit::Radians };
    let theta = crate::angle::parse_angle(angle, unit).map_err(Failure::usage)?;
    let kind = match pattern {
        SweepPattern::Delta => PatternKind::Delta,
        SweepPattern::Step => PatternKind::Step,
    };
    let cache = LoggedCache(DiskCache::new(args.cache.dir()));
    let sweep = gibbs_sweep(kind, &args.sides, theta, &cache)?;
    println!("N,s,S,undershoot,overshoot");
    for row in &sweep.rows {
        let r = &row.report;
        println!("{},{:?},{:?},{:?},{:?}", row.side, r.min(), r.max(), r.undershoot(), r.overshoot());
    }
    for row in &sweep.rows {
        print_report(&format!("N={}", row.side), &row.report);
    }
    println!("{}", sweep.summary());
    if let Some(out) = &args.output {
        sweep.write_csv(out)?;
    }
    if let Some(dir) = &args.profile {
        fs::create_dir_all(dir).map_err(finrot::Error::from)?;
        for row in &sweep.rows {
            let path = dir.join(format!("profile-{kind}-N{}.csv", row.side));
            write_profile_csv(&row.report.profile, &path)?;
        }
    }
    Ok(())
}

fn analyze_image(input: &Path, profile: Option<&Path>) -> Outcome {
    let picture = read_any(input)?;
    let channels = match &picture {
        Picture::Mono(m) => vec![("gray", m.clone())],
        Picture::Rgb(c) => {
            let [r, g, b] = c.clone().into_channels();
            vec![("r", r), ("g", g), ("b", b)]
        }
    };
    for (name, image) in &channels {
        let report = overshoot_stats(image);
        print_report(name, &report);
        if let Some(p) = profile {
            let path = if channels.len() == 1 {
                p.to_path_buf()
            } else {
                let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("profile");
                p.with_file_name(format!("{stem}-{name}.csv"))
            };
            write_profile_csv(&report.profile, &path)?;
        }
    }
    Ok(())
}
