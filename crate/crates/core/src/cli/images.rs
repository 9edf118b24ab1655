//! `similarity`, `superpixel`, `superpixel-study` and `rank`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{write_file, GlobalArgs, ImageArgs, RankArgs, SimilarityArgs, StudyArgs, SuperpixelArgs};
use crate::datasets::{load_csv, subsample, LabelColumn};
use crate::error::{Error, Result};
use crate::graphs::{adjacency, knn_graph};
use crate::imaging::{
    image_distance, match_sizes, read_image, superpixel_centroid_image, superpixel_study,
    write_image, ImageGraphOptions, RasterImage,
};
use crate::seed::derive_seed;
use crate::similarity::{manifold_distance, SimilarityResult};

const IMAGE_K: usize = 8;
const TABLE_K: usize = 10;

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "ppm" | "pnm"))
        .unwrap_or(false)
}

fn graph_options(g: &GlobalArgs, img: &ImageArgs) -> ImageGraphOptions {
    ImageGraphOptions {
        k: g.k.unwrap_or(IMAGE_K),
        include_xy: !img.no_xy,
        t: g.t.0,
        variant: g.variant,
        symmetrize: g.symmetrize,
    }
}

fn load_limited(path: &Path, max_side: usize) -> Result<RasterImage> {
    read_image(path)?.limit_side(max_side)
}

fn record(r: &SimilarityResult) -> String {
    format!(
        "distance,t,variant,n,score\n{},{},{},{},{}\n",
        r.distance,
        r.t,
        r.variant,
        r.n,
        r.score()
    )
}

pub fn similarity(g: &GlobalArgs, a: &SimilarityArgs) -> Result<String> {
    let (first_img, second_img) = (is_image(&a.first), is_image(&a.second));
    if first_img != second_img {
        return Err(Error::invalid("cannot compare an image with a table"));
    }
    if first_img {
        let (x, y) = match_sizes(
            &load_limited(&a.first, a.image.max_side)?,
            &load_limited(&a.second, a.image.max_side)?,
        )?;
        let opts = graph_options(g, &a.image);
        if let Some(prefix) = &a.export_adjacency {
            for (img, tag) in [(&x, "a"), (&y, "b")] {
                let cloud = crate::imaging::image_to_point_cloud(img, opts.include_xy);
                let adj = adjacency(&knn_graph(&cloud, opts.k, opts.symmetrize)?);
                write_file(&suffixed(prefix, tag), &adj.entries().to_text())?;
            }
        }
        return Ok(record(&image_distance(&x, &y, &opts)?));
    }

    let label: LabelColumn = a.label_col.parse().expect("infallible");
    let mut x = load_csv(&a.first, &label)?;
    let mut y = load_csv(&a.second, &label)?;
    if x.cloud().dim() != y.cloud().dim() {
        return Err(Error::mismatch(
            format!("{} has d={}", a.first.display(), x.cloud().dim()),
            format!("{} has d={}", a.second.display(), y.cloud().dim()),
        ));
    }
    // equal node counts are required; the larger table is subsampled
    let n = x.len().min(y.len());
    if x.len() > n {
        x = subsample(&x, n, derive_seed(g.seed, &[1]))?;
    }
    if y.len() > n {
        y = subsample(&y, n, derive_seed(g.seed, &[2]))?;
    }
    let k = g.k.unwrap_or(TABLE_K);
    let a1 = adjacency(&knn_graph(x.cloud(), k, g.symmetrize)?);
    let a2 = adjacency(&knn_graph(y.cloud(), k, g.symmetrize)?);
    if let Some(prefix) = &a.export_adjacency {
        write_file(&suffixed(prefix, "a"), &a1.entries().to_text())?;
        write_file(&suffixed(prefix, "b"), &a2.entries().to_text())?;
    }
    Ok(record(&manifold_distance(&a1, &a2, g.t.0, g.variant)?))
}

fn suffixed(prefix: &Path, tag: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(format!(".{tag}.txt"));
    PathBuf::from(s)
}

pub fn superpixel(g: &GlobalArgs, a: &SuperpixelArgs) -> Result<()> {
    let Some(out) = &g.out else {
        return Err(Error::invalid("superpixel needs --out for the output image"));
    };
    let mut img = read_image(&a.input)?;
    if let Some(side) = a.max_side {
        img = img.limit_side(side)?;
    }
    let result = superpixel_centroid_image(&img, a.segments, g.seed)?;
    write_image(&result.image, out)?;
    if let Some(p) = &a.segments_out {
        write_file(p, &result.segments.to_text())?;
    }
    if let Some(p) = &a.palette_out {
        write_file(p, &result.palette.to_text())?;
    }
    Ok(())
}

pub fn study(g: &GlobalArgs, a: &StudyArgs) -> Result<String> {
    let rows = superpixel_study(
        &load_limited(&a.first, a.image.max_side)?,
        &load_limited(&a.second, a.image.max_side)?,
        &a.sizes,
        &graph_options(g, &a.image),
        g.seed,
    )?;
    let mut out = String::from("grid_size,distance\n");
    for (size, d) in rows {
        match size {
            None => writeln!(out, "original,{d}"),
            Some(n) => writeln!(out, "{n},{d}"),
        }
        .expect("string write");
    }
    Ok(out)
}

fn gallery_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = fs::read_dir(dir).map_err(|source| match source.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile {
            path: dir.to_path_buf(),
        },
        _ => Error::Io {
            path: dir.to_path_buf(),
            source,
        },
    })?;
    for entry in entries {
        let path = entry
            .map_err(|source| Error::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if path.is_dir() {
            gallery_files(&path, out)?;
        } else if is_image(&path) {
            out.push(path);
        }
    }
    Ok(())
}

pub fn rank(g: &GlobalArgs, a: &RankArgs) -> Result<String> {
    let mut files = Vec::new();
    gallery_files(&a.gallery, &mut files)?;
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "no .png/.ppm/.pnm images under {}",
            a.gallery.display()
        )));
    }
    let prepare = |img: RasterImage| -> Result<RasterImage> {
        match a.superpixel {
            Some(n) => Ok(superpixel_centroid_image(&img, n, g.seed)?.image),
            None => Ok(img),
        }
    };
    let reference = prepare(load_limited(&a.reference, a.image.max_side)?)?;
    let opts = graph_options(g, &a.image);
    let mut ranked = Vec::with_capacity(files.len());
    for path in files {
        let img = read_image(&path)?;
        let img = crate::imaging::resize(&img, reference.width(), reference.height())?;
        let d = image_distance(&reference, &prepare(img)?, &opts)?.distance;
        ranked.push((path, d));
    }
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));

    let mut out = String::new();
    if a.class_average {
        let mut classes: Vec<(String, Vec<f64>)> = Vec::new();
        for (path, d) in &ranked {
            let class = path
                .strip_prefix(&a.gallery)
                .ok()
                .and_then(|rel| {
                    let mut parts = rel.components();
                    let first = parts.next()?;
                    parts.next().map(|_| first.as_os_str().to_string_lossy().into_owned())
                })
                .unwrap_or_else(|| ".".to_string());
            match classes.iter_mut().find(|(c, _)| *c == class) {
                Some((_, v)) => v.push(*d),
                None => classes.push((class, vec![*d])),
            }
        }
        let mut rows: Vec<(String, f64, usize)> = classes
            .into_iter()
            .map(|(c, v)| (c, crate::stats::mean(&v), v.len()))
            .collect();
        rows.sort_by(|x, y| x.1.total_cmp(&y.1).then_with(|| x.0.cmp(&y.0)));
        out.push_str("class,mean_distance,count\n");
        for (c, m, n) in rows {
            writeln!(out, "{c},{m},{n}").expect("string write");
        }
    } else {
        out.push_str("path,distance\n");
        for (p, d) in ranked {
            writeln!(out, "{},{d}", p.display()).expect("string write");
        }
    }
    Ok(out)
}
