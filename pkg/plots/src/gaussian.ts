/** Maximum-likelihood Gaussian fit and density evaluation. */

export interface GaussianFit {
  mean: number;
  std: number;
}

export function fitGaussian(samples: number[]): GaussianFit {
  if (samples.length < 2) {
    throw new Error("need at least 2 samples to fit a Gaussian");
  }
  const n = samples.length;
  const mean = samples.reduce((a, b) => a + b, 0) / n;
  const variance = samples.reduce((a, b) => a + (b - mean) * (b - mean), 0) / n;
  return { mean, std: Math.sqrt(variance) };
}

export function gaussianPdf(x: number, fit: GaussianFit): number {
  if (fit.std === 0) {
    return x === fit.mean ? Infinity : 0;
  }
  const z = (x - fit.mean) / fit.std;
  return Math.exp(-0.5 * z * z) / (fit.std * Math.sqrt(2 * Math.PI));
}
